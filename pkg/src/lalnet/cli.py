"""Command-line front end: analyze, train, infer, eval, gradcheck and ablate.

Settings resolve in three layers: built-in defaults (with the chosen preset),
then a flat ``key = value`` config file given by ``--config``, then flags.
Every config key has a matching ``--kebab-case`` flag. Exit codes are 0 on
success, 1 on a runtime failure and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, gradsuite
from .architecture import ABLATION_VARIANTS, ModelConfig, init_params, load_checkpoint
from .architecture.checkpoint import CheckpointError
from .architecture.model import count_parameters, enhance, valid_size
from .data import (IMAGE_SUFFIXES, ImageFormatError, PairedCorpus, corpus_from_images, list_images,
                   load_image, load_manifest_corpus, make_toy_corpus, save_image)
from .training import LossWeights, TrainConfig, TrainingDiverged, evaluate, train

log = logging.getLogger("lalnet")

SUBCOMMANDS = ("analyze", "train", "infer", "eval", "gradcheck", "ablate")
VARIANT_GROUPS = {
    "modules": ["#1", "#2", "#3", "#4", "#5", "#6"],
    "levels": ["n=2", "n=3", "n=4"],
    "design": ["tconv", "ss2d-resblock"],
}
VARIANT_GROUPS["all"] = VARIANT_GROUPS["modules"] + VARIANT_GROUPS["design"] + VARIANT_GROUPS["levels"]
VARIANT_DESCRIPTIONS = {
    "#1": "plain conv stand-ins for every module",
    "#2": "no MCM", "#3": "no DDCM", "#4": "no LGA", "#5": "no LSSM", "#6": "full model",
    "tconv": "standard conv instead of grouped conv", "ss2d-resblock": "residual block instead of SS2D",
    "n=2": "2 pyramid levels", "n=3": "3 pyramid levels", "n=4": "4 pyramid levels",
}
ABLATE_COLUMNS = ("variant", "description", "params", "psnr", "ssim", "delta_e", "psnr_in", "ssim_in",
                  "psnr_vs_full", "ssim_vs_full")

# shorthand switches: flag -> (config key, value)
TOGGLES = {
    "--no-mcm": ("use_mcm", False),
    "--no-ddcm": ("use_ddcm", False),
    "--no-lga": ("use_lga", False),
    "--no-lssm": ("use_lssm", False),
    "--no-ss2d": ("use_ss2d", False),
    "--tconv": ("gconv_separated", False),
}

# subcommand-specific defaults applied under the config file
SUB_DEFAULTS = {"ablate": {"iters": 200, "eval_every": 200}}


class UsageError(Exception):
    """Bad command line or config file; maps to exit code 2."""


@dataclass
class CliPlan:
    subcommand: str
    model: ModelConfig
    train: TrainConfig
    weights: LossWeights
    paths: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.train.seed


def _fields(cls) -> dict:
    return {f.name: (f.type.__name__ if isinstance(f.type, type) else str(f.type)) for f in dataclasses.fields(cls)}


MODEL_KEYS = {k: t for k, t in _fields(ModelConfig).items() if k != "preset"}
TRAIN_KEYS = _fields(TrainConfig)
LOSS_KEYS = _fields(LossWeights)
CONFIG_KEYS = {"preset": "str", **MODEL_KEYS, **TRAIN_KEYS, **LOSS_KEYS}


def _kebab(key: str) -> str:
    return "--" + key.replace("_", "-")


def _convert(key: str, raw: str, origin: str):
    kind = CONFIG_KEYS[key]
    try:
        if kind == "bool":
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw.strip()
    except ValueError:
        raise UsageError(f"{origin}: invalid value {raw!r} for {key} (expected {kind})") from None


def read_config_file(path) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment, keys may use - or _."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"--config: no such file {str(path)!r}")
    out = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _convert(key, value, f"{path}:{lineno}")
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit; surface as a usage error instead
        raise UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration")
    g.add_argument("--config", metavar="FILE", help="flat key = value config file")
    g.add_argument("--preset", choices=("tiny", "full"), default=None)
    for key, kind in {**MODEL_KEYS, **TRAIN_KEYS, **LOSS_KEYS}.items():
        if kind == "bool":
            g.add_argument(_kebab(key), dest=key, nargs="?", const="true", default=None, metavar="BOOL")
        else:
            g.add_argument(_kebab(key), dest=key, default=None, metavar=kind.upper())
    for flag in TOGGLES:
        g.add_argument(flag, dest="toggle_" + flag[2:].replace("-", "_"), action="store_true")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lalnet", description="Adaptive lighting enhancement toolkit.")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    p = sub.add_parser("analyze", help="per-channel energy report for a directory of images")
    p.add_argument("dir")
    p.add_argument("--out", required=True)
    p.add_argument("--spectra", nargs="?", const="", default=None, metavar="DIR",
                   help="also write log-magnitude spectra (default: <out>_spectra/)")
    p.add_argument("--levels", type=int, default=1)
    _add_config_flags(p)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--data", required=True, help="manifest CSV, image directory, or 'toy'")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=int, default=64, help="toy corpus size")
    _add_config_flags(p)

    p = sub.add_parser("infer", help="enhance one image")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)

    p = sub.add_parser("eval", help="per-image metrics on a paired corpus")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True, help="manifest CSV, image directory, or 'toy'")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=16, help="toy corpus size")
    _add_config_flags(p)

    p = sub.add_parser("gradcheck", help="finite-difference gradient checks")
    p.add_argument("--op", default=None, help="single check name; default runs all")
    _add_config_flags(p)

    p = sub.add_parser("ablate", help="train module variants under one budget and tabulate metrics")
    p.add_argument("--variants", default="all",
                   help="comma list of variant names or groups: " + ", ".join(VARIANT_GROUPS))
    p.add_argument("--out", required=True)
    p.add_argument("--data", default="toy")
    p.add_argument("--count", type=int, default=64, help="toy training images")
    _add_config_flags(p)
    return parser


def _resolve_settings(ns: argparse.Namespace, argv: list[str]) -> tuple[ModelConfig, TrainConfig, LossWeights]:
    settings = dict(SUB_DEFAULTS.get(ns.subcommand, {}))
    if ns.config:
        settings.update(read_config_file(ns.config))
    flags = {}
    for key in CONFIG_KEYS:
        raw = getattr(ns, key, None)
        if raw is not None:
            flags[key] = _convert(key, str(raw), _kebab(key))
    for flag, (key, value) in TOGGLES.items():
        if getattr(ns, "toggle_" + flag[2:].replace("-", "_")):
            if key in flags and flags[key] != value:
                raise UsageError(f"{flag} conflicts with {_kebab(key)} {str(flags[key]).lower()}")
            flags[key] = value
    settings.update(flags)

    if not settings.get("use_lssm", True) and not settings.get("use_ss2d", True):
        token = "--no-ss2d" if "--no-ss2d" in argv else "use_ss2d"
        raise UsageError(f"{token} conflicts with --no-lssm: SS2D only exists inside LSSM")

    preset = settings.pop("preset", "tiny")
    try:
        model = ModelConfig.from_preset(preset, **{k: v for k, v in settings.items() if k in MODEL_KEYS})
        tcfg = TrainConfig(**{k: v for k, v in settings.items() if k in TRAIN_KEYS})
        weights = LossWeights(**{k: v for k, v in settings.items() if k in LOSS_KEYS})
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return model, tcfg, weights


def _need_file(flag: str, value: str) -> Path:
    path = Path(value)
    if not path.is_file():
        raise UsageError(f"{flag}: no such file {value!r}")
    return path


def _need_data(flag: str, value: str):
    if value == "toy":
        return value
    path = Path(value)
    if not path.exists():
        raise UsageError(f"{flag}: no such file or directory {value!r}")
    return path


def _output(flag: str, value: str, is_dir: bool = False) -> Path:
    path = Path(value)
    if is_dir and path.exists() and not path.is_dir():
        raise UsageError(f"{flag}: {value!r} exists and is not a directory")
    if not is_dir and path.is_dir():
        raise UsageError(f"{flag}: {value!r} is a directory")
    for parent in path.parents:
        if parent.exists():
            if not parent.is_dir():
                raise UsageError(f"{flag}: {str(parent)!r} is not a directory")
            break
    return path


def _expand_variants(spec: str) -> list[str]:
    names = []
    for token in (t.strip() for t in spec.split(",")):
        if not token:
            continue
        if token in VARIANT_GROUPS:
            names.extend(VARIANT_GROUPS[token])
        elif token in ABLATION_VARIANTS:
            names.append(token)
        else:
            raise UsageError(f"--variants: unknown variant {token!r}")
    if not names:
        raise UsageError("--variants: empty list")
    return list(dict.fromkeys(names))


def parse_and_plan(argv) -> CliPlan:
    """Parse ``argv`` (without the program name) into a validated plan.

    Raises :class:`UsageError` naming the offending token for unknown flags,
    bad values, missing inputs and conflicting toggles.
    """
    argv = list(argv)
    ns = build_parser().parse_args(argv)
    if ns.subcommand is None:
        raise UsageError("missing subcommand; choose from " + ", ".join(SUBCOMMANDS))
    model, tcfg, weights = _resolve_settings(ns, argv)
    paths, options = {}, {"verbose": ns.verbose}
    cmd = ns.subcommand
    if cmd == "analyze":
        d = Path(ns.dir)
        if not d.is_dir():
            raise UsageError(f"analyze: no such directory {ns.dir!r}")
        if ns.levels < 1:
            raise UsageError(f"--levels: must be >= 1, got {ns.levels}")
        paths["dir"] = d
        paths["out"] = _output("--out", ns.out)
        if ns.spectra is not None:
            spectra = ns.spectra or str(paths["out"].with_name(paths["out"].stem + "_spectra"))
            paths["spectra"] = _output("--spectra", spectra, is_dir=True)
        options["levels"] = ns.levels
    elif cmd == "train":
        paths["data"] = _need_data("--data", ns.data)
        paths["out"] = _output("--out", ns.out, is_dir=True)
        options["count"] = ns.count
    elif cmd == "infer":
        paths["ckpt"] = _need_file("--ckpt", ns.ckpt)
        paths["in"] = _need_file("--in", ns.input)
        paths["out"] = _output("--out", ns.out)
        if paths["out"].suffix.lower() not in IMAGE_SUFFIXES:
            raise UsageError(f"--out: unsupported image extension {paths['out'].suffix!r}")
    elif cmd == "eval":
        paths["ckpt"] = _need_file("--ckpt", ns.ckpt)
        paths["data"] = _need_data("--data", ns.data)
        paths["out"] = _output("--out", ns.out)
        options["count"] = ns.count
    elif cmd == "gradcheck":
        if ns.op is not None and ns.op not in gradsuite.available_checks():
            raise UsageError(f"--op: unknown check {ns.op!r}")
        options["op"] = ns.op
    elif cmd == "ablate":
        options["variants"] = _expand_variants(ns.variants)
        paths["data"] = _need_data("--data", ns.data)
        paths["out"] = _output("--out", ns.out)
        options["count"] = ns.count
    for key in ("count",):
        if key in options and options[key] < 1:
            raise UsageError(f"--{key}: must be >= 1, got {options[key]}")
    return CliPlan(cmd, model, tcfg, weights, paths, options)


# -- data loading ------------------------------------------------------------------------

def load_corpus(data, count: int, size: int, seed: int) -> tuple[PairedCorpus, PairedCorpus]:
    """(train, held-out) corpora from 'toy', a manifest CSV or a directory of clean images.

    Non-toy sources keep the last tenth (at least one image) for evaluation
    when there are two or more images.
    """
    if data == "toy":
        return make_toy_corpus(count, size, seed), make_toy_corpus(max(1, count // 4), size, seed + 1)
    data = Path(data)
    if data.is_file():
        corpus = load_manifest_corpus(data)
    else:
        images = [load_image(p) for p in list_images(data)]
        if not images:
            raise FileNotFoundError(f"no images found in {data}")
        corpus = corpus_from_images(images, seed=seed)
    n = len(corpus)
    if n < 2:
        return corpus, corpus
    k = max(1, n // 10)
    split = lambda a, b: PairedCorpus(corpus.degraded[a:b], corpus.clean[a:b], corpus.kinds[a:b])  # noqa: E731
    return split(0, n - k), split(n - k, n)


def load_eval_corpus(data, count: int, size: int, seed: int) -> PairedCorpus:
    if data == "toy":
        return make_toy_corpus(count, size, seed + 1)
    data = Path(data)
    if data.is_file():
        return load_manifest_corpus(data)
    manifest = data / "manifest.csv"
    if manifest.is_file():
        return load_manifest_corpus(manifest)
    images = [load_image(p) for p in list_images(data)]
    if not images:
        raise FileNotFoundError(f"no images found in {data}")
    return corpus_from_images(images, seed=seed)


# -- subcommands --------------------------------------------------------------------------

def run_analyze(plan: CliPlan) -> int:
    rows = analysis.corpus_report(plan.paths["dir"], plan.paths["out"], levels=plan.options["levels"],
                                  spectra_dir=plan.paths.get("spectra"))
    print(f"wrote {len(rows)} rows to {plan.paths['out']}")
    return 0


def run_train(plan: CliPlan) -> int:
    train_set, heldout = load_corpus(plan.paths["data"], plan.options["count"], plan.train.patch_size, plan.seed)
    result = train(plan.model, plan.train, train_set, heldout, out_dir=plan.paths["out"], weights=plan.weights)
    f = result.final
    print(f"psnr {f.psnr_in:.3f} -> {f.psnr:.3f} dB, ssim {f.ssim_in:.4f} -> {f.ssim:.4f}")
    print(f"wrote {result.checkpoint_path} and {result.curve_path}")
    return 0


def run_infer(plan: CliPlan) -> int:
    store = load_checkpoint(plan.paths["ckpt"])
    if store.config is None:
        raise CheckpointError("checkpoint has no stored model configuration")
    image = load_image(plan.paths["in"])
    out = np.clip(enhance(image.astype(store.dtype), store, store.config), 0.0, 1.0)
    plan.paths["out"].parent.mkdir(parents=True, exist_ok=True)
    save_image(out, plan.paths["out"])
    print(f"wrote {plan.paths['out']} ({out.shape[2]}x{out.shape[1]})")
    return 0


EVAL_COLUMNS = ("index", "kind", "psnr_in", "ssim_in", "psnr", "ssim", "delta_e")


def run_eval(plan: CliPlan) -> int:
    store = load_checkpoint(plan.paths["ckpt"])
    if store.config is None:
        raise CheckpointError("checkpoint has no stored model configuration")
    corpus = load_eval_corpus(plan.paths["data"], plan.options["count"], plan.train.patch_size, plan.seed)
    result = evaluate(store, store.config, corpus)
    plan.paths["out"].parent.mkdir(parents=True, exist_ok=True)
    with open(plan.paths["out"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVAL_COLUMNS)
        for i, (row, kind) in enumerate(zip(result.per_image, corpus.kinds)):
            w.writerow([i, kind] + [repr(float(row[k])) for k in EVAL_COLUMNS[2:]])
    print(f"mean psnr {result.psnr:.3f} dB (input {result.psnr_in:.3f}), ssim {result.ssim:.4f} "
          f"(input {result.ssim_in:.4f}), delta_e {result.delta_e:.3f}")
    return 0


def run_gradcheck(plan: CliPlan) -> int:
    names = [plan.options["op"]] if plan.options["op"] else gradsuite.available_checks()
    failed = 0
    for name in names:
        err = gradsuite.run_check(name, seed=plan.seed)
        ok = err < gradsuite.TOLERANCE
        failed += not ok
        print(f"{name:16s} {err:.3e} {'ok' if ok else 'FAIL'}")
    print(f"{len(names) - failed}/{len(names)} checks within {gradsuite.TOLERANCE:g}")
    return 1 if failed else 0


def run_ablate(plan: CliPlan) -> list[dict]:
    """Train every requested variant with the same corpus, budget and seed; write one CSV row each.

    Images are sized for the deepest pyramid requested so that every variant
    sees identical data. A diverging variant gets a NaN row and the run
    continues. The ``*_vs_full`` columns report each variant minus ``#6``.
    """
    names = plan.options["variants"]
    configs = {n: plan.model.replace(**ABLATION_VARIANTS[n]) for n in names}
    size = max(valid_size(plan.train.patch_size, c) for c in configs.values())
    tcfg = dataclasses.replace(plan.train, patch_size=size)
    train_set, heldout = load_corpus(plan.paths["data"], plan.options["count"], size, plan.seed)
    rows = []
    for name in names:
        cfg = configs[name]
        params = count_parameters(init_params(cfg, seed=plan.seed))
        row = dict(variant=name, description=VARIANT_DESCRIPTIONS.get(name, ""), params=params)
        try:
            final = train(cfg, tcfg, train_set, heldout, weights=plan.weights).final
            row.update(psnr=final.psnr, ssim=final.ssim, delta_e=final.delta_e,
                       psnr_in=final.psnr_in, ssim_in=final.ssim_in)
        except (TrainingDiverged, FloatingPointError) as exc:
            log.warning("variant %s diverged: %s", name, exc)
            row.update(psnr=math.nan, ssim=math.nan, delta_e=math.nan, psnr_in=math.nan, ssim_in=math.nan)
        rows.append(row)
        log.info("variant %s psnr %.3f ssim %.4f", name, row["psnr"], row["ssim"])
    full = next((r for r in rows if r["variant"] == "#6"), None)
    for r in rows:
        r["psnr_vs_full"] = r["psnr"] - full["psnr"] if full else math.nan
        r["ssim_vs_full"] = r["ssim"] - full["ssim"] if full else math.nan

    out = plan.paths["out"]
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ABLATE_COLUMNS)
        for r in rows:
            w.writerow([r["variant"], r["description"], r["params"]]
                       + [repr(float(r[k])) for k in ABLATE_COLUMNS[3:]])
    return rows


def _run_ablate_cmd(plan: CliPlan) -> int:
    rows = run_ablate(plan)
    for r in rows:
        trend = ""
        if not math.isnan(r["psnr_vs_full"]) and r["variant"] != "#6":
            trend = "  full >= variant" if r["psnr_vs_full"] <= 0 else "  variant beats full"
        print(f"{r['variant']:14s} params {r['params']:>9d}  psnr {r['psnr']:.3f}  ssim {r['ssim']:.4f}{trend}")
    print(f"wrote {plan.paths['out']}")
    return 0


RUNNERS = {"analyze": run_analyze, "train": run_train, "infer": run_infer, "eval": run_eval,
           "gradcheck": run_gradcheck, "ablate": _run_ablate_cmd}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        plan = parse_and_plan(argv)
    except UsageError as exc:
        print(f"lalnet: usage error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if plan.options.get("verbose") else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return RUNNERS[plan.subcommand](plan)
    except (CheckpointError, ImageFormatError, TrainingDiverged, FileNotFoundError, OSError, ValueError) as exc:
        print(f"lalnet: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
