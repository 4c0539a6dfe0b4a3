import numpy as np
import pytest

from lalnet import cli, gradsuite
from lalnet.architecture import ModelConfig, init_params, save_checkpoint
from lalnet.cli import UsageError, main, parse_and_plan, read_config_file
from lalnet.data import load_image, save_image

# keeps the CLI runs fast; mirrors the small config the gradient suite uses
SMALL_FLAGS = ["--base-channels", "6", "--expansion-factor", "2", "--state-dim", "3", "--mlp-ratio", "2",
               "--detail-channels", "4", "--pyramid-levels", "2", "--patch-size", "16"]


@pytest.fixture
def ckpt(tmp_path):
    config = ModelConfig.from_preset("tiny", base_channels=6, expansion_factor=2, state_dim=3, mlp_ratio=2,
                                     detail_channels=4, pyramid_levels=2)
    path = tmp_path / "m.lalnet"
    save_checkpoint(init_params(config), path)
    return path


# -- planning -------------------------------------------------------------------------

def test_train_plan_example(tmp_path):
    (tmp_path / "d").mkdir()
    plan = parse_and_plan(["train", "--preset", "tiny", "--iters", "10", "--data", str(tmp_path / "d"),
                           "--out", str(tmp_path / "o")])
    assert plan.subcommand == "train"
    assert plan.model.preset == "tiny" and plan.model.base_channels == 24
    assert plan.train.iters == 10
    assert plan.paths["out"] == tmp_path / "o"


def test_default_pyramid_levels_is_three(tmp_path):
    plan = parse_and_plan(["train", "--data", "toy", "--out", str(tmp_path / "o")])
    assert plan.model.pyramid_levels == 3
    assert plan.train.lr == 1e-4 and plan.seed == 0


def test_no_lga_toggle(tmp_path):
    plan = parse_and_plan(["train", "--no-lga", "--data", "toy", "--out", str(tmp_path / "o")])
    assert plan.model.use_lga is False and plan.model.use_mcm is True


def test_flags_override_config_file_override_defaults(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# experiment\npreset = full\niters = 7\nlr = 0.001\nuse-lga = false\n")
    plan = parse_and_plan(["train", "--config", str(cfg), "--iters", "3", "--data", "toy",
                           "--out", str(tmp_path / "o")])
    assert plan.model.preset == "full" and plan.model.use_lga is False
    assert plan.train.iters == 3 and plan.train.lr == 1e-3
    ablate = parse_and_plan(["ablate", "--variants", "#6", "--out", str(tmp_path / "a.csv")])
    assert ablate.train.iters == 200
    ablate = parse_and_plan(["ablate", "--config", str(cfg), "--variants", "#6", "--out", str(tmp_path / "a.csv")])
    assert ablate.train.iters == 7


def test_config_file_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("iterz = 3\n")
    with pytest.raises(UsageError, match="iterz"):
        read_config_file(cfg)


@pytest.mark.parametrize("argv,token", [
    (["train", "--data", "toy", "--out", "o", "--bogus"], "--bogus"),
    (["train", "--data", "toy", "--out", "o", "--no-lssm", "--no-ss2d"], "--no-ss2d"),
    (["train", "--data", "toy", "--out", "o", "--no-lga", "--use-lga", "true"], "--no-lga"),
    (["train", "--data", "missing-dir", "--out", "o"], "missing-dir"),
    (["train", "--data", "toy", "--out", "o", "--iters", "ten"], "--iters"),
    (["infer", "--ckpt", "nope.lalnet", "--in", "x.png", "--out", "y.png"], "nope.lalnet"),
    (["gradcheck", "--op", "warp"], "warp"),
    (["ablate", "--variants", "#9", "--out", "a.csv"], "#9"),
    (["analyze", "no-such-dir", "--out", "r.csv"], "no-such-dir"),
])
def test_usage_errors_name_the_offending_token(argv, token):
    with pytest.raises(UsageError) as exc:
        parse_and_plan(argv)
    assert token in str(exc.value)


def test_variant_groups_cover_level_sweep():
    plan = parse_and_plan(["ablate", "--variants", "modules,levels", "--out", "a.csv"])
    assert plan.options["variants"] == ["#1", "#2", "#3", "#4", "#5", "#6", "n=2", "n=3", "n=4"]


# -- exit codes -----------------------------------------------------------------------

@pytest.mark.parametrize("argv", [[], ["train"], ["infer", "--ckpt", "x"], ["eval"], ["analyze"],
                                  ["ablate"], ["gradcheck", "--op"], ["frobnicate"]])
def test_usage_error_exit_code(argv, capsys):
    assert main(argv) == 2
    assert "usage" in capsys.readouterr().err


def test_analyze_exit_codes(tmp_path):
    (tmp_path / "d").mkdir()
    save_image(np.full((3, 4, 4), 0.5), tmp_path / "d" / "a.png")
    assert main(["analyze", str(tmp_path / "d"), "--out", str(tmp_path / "r.csv"), "--spectra"]) == 0
    assert len((tmp_path / "r.csv").read_text().splitlines()) == 4
    assert (tmp_path / "r_spectra" / "a_R-FFT.png").is_file()
    (tmp_path / "bad").mkdir()
    (tmp_path / "bad" / "x.png").write_bytes(b"nope")
    assert main(["analyze", str(tmp_path / "bad"), "--out", str(tmp_path / "r2.csv")]) == 1


def test_train_exit_codes(tmp_path):
    out = tmp_path / "run"
    argv = ["train", "--data", "toy", "--count", "4", "--iters", "2", "--eval-every", "1", "--out", str(out)]
    assert main(argv + SMALL_FLAGS) == 0
    assert (out / "model.lalnet").is_file()
    assert len((out / "curve.csv").read_text().splitlines()) == 3
    (tmp_path / "empty").mkdir()
    assert main(["train", "--data", str(tmp_path / "empty"), "--out", str(out)] + SMALL_FLAGS) == 1


def test_infer_keeps_dimensions(tmp_path, ckpt):
    img = np.random.default_rng(0).uniform(0, 1, (3, 37, 50))
    save_image(img, tmp_path / "in.png")
    assert main(["infer", "--ckpt", str(ckpt), "--in", str(tmp_path / "in.png"),
                 "--out", str(tmp_path / "out.png")]) == 0
    out = load_image(tmp_path / "out.png")
    assert out.shape == (3, 37, 50)
    # untrained model is the identity map
    np.testing.assert_array_equal(out, load_image(tmp_path / "in.png"))


def test_infer_bad_checkpoint_is_runtime_failure(tmp_path, capsys):
    (tmp_path / "bad.lalnet").write_bytes(b"LALN\x01")
    save_image(np.zeros((3, 8, 8)), tmp_path / "in.png")
    assert main(["infer", "--ckpt", str(tmp_path / "bad.lalnet"), "--in", str(tmp_path / "in.png"),
                 "--out", str(tmp_path / "o.png")]) == 1
    assert "unexpected end of checkpoint" in capsys.readouterr().err


def test_eval_exit_codes(tmp_path, ckpt):
    out = tmp_path / "eval.csv"
    assert main(["eval", "--ckpt", str(ckpt), "--data", "toy", "--count", "3", "--out", str(out)]
                + ["--patch-size", "16"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "index,kind,psnr_in,ssim_in,psnr,ssim,delta_e" and len(lines) == 4
    (tmp_path / "junk.lalnet").write_bytes(b"XXXX" + b"\0" * 20)
    assert main(["eval", "--ckpt", str(tmp_path / "junk.lalnet"), "--data", "toy", "--out", str(out)]) == 1


def test_gradcheck_exit_codes(monkeypatch, capsys):
    assert main(["gradcheck", "--op", "softmax"]) == 0
    assert "softmax" in capsys.readouterr().out
    monkeypatch.setattr(gradsuite, "run_check", lambda name, seed=0: 1.0)
    assert main(["gradcheck", "--op", "softmax"]) == 1


def test_ablate_rows_and_determinism(tmp_path):
    argv = ["ablate", "--variants", "#4,#6", "--iters", "2", "--count", "4"] + SMALL_FLAGS
    assert main(argv + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b.csv")]) == 0
    text = (tmp_path / "a.csv").read_text()
    assert text == (tmp_path / "b.csv").read_text()
    header, *rows = text.splitlines()
    assert header.split(",")[:4] == ["variant", "description", "params", "psnr"]
    assert [r.split(",")[0] for r in rows] == ["#4", "#6"]
    assert int(rows[1].split(",")[2]) > int(rows[0].split(",")[2]) > 0


def test_ablate_records_divergence_as_nan(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise cli.TrainingDiverged("loss diverged (non-finite) at iteration 1")

    monkeypatch.setattr(cli, "train", boom)
    plan = parse_and_plan(["ablate", "--variants", "#6", "--out", str(tmp_path / "a.csv")] + SMALL_FLAGS)
    rows = cli.run_ablate(plan)
    assert len(rows) == 1 and np.isnan(rows[0]["psnr"])
    assert "nan" in (tmp_path / "a.csv").read_text()


def test_ablate_empty_data_is_runtime_failure(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["ablate", "--variants", "#6", "--data", str(tmp_path / "empty"),
                 "--out", str(tmp_path / "a.csv")] + SMALL_FLAGS) == 1
