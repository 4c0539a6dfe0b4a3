import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lalnet.analysis import channel_energy_stats, corpus_report, spectrum_export
from lalnet.data import load_image, save_image

from oracles import block_energy_fraction


def checkerboard(h=8, w=8):
    yy, xx = np.mgrid[0:h, 0:w]
    return np.broadcast_to(((yy + xx) % 2).astype(float), (3, h, w)).copy()


def test_constant_image_is_all_low_frequency():
    for stats in channel_energy_stats(np.full((3, 6, 10), 0.4)):
        assert stats.low_energy == pytest.approx(1.0, abs=1e-12)
        assert stats.high_energy == pytest.approx(0.0, abs=1e-12)
        assert stats.mean == pytest.approx(0.4)


def test_checkerboard_splits_evenly():
    for stats in channel_energy_stats(checkerboard()):
        assert stats.low_energy == pytest.approx(0.5, abs=1e-12)


def test_zero_channel_is_flagged_degenerate():
    img = np.zeros((3, 4, 4))
    img[1] = 0.5
    report = channel_energy_stats(img)
    assert report[0].degenerate and report[0].low_energy == 1.0
    assert not report[1].degenerate


def test_matches_block_formula_oracle():
    img = np.random.default_rng(0).uniform(0, 1, (3, 10, 14))
    for ch, stats in zip(img, channel_energy_stats(img)):
        assert stats.low_energy == pytest.approx(block_energy_fraction(ch), abs=1e-12)


def test_odd_extent_is_padded_symmetrically():
    img = np.random.default_rng(1).uniform(0, 1, (3, 5, 7))
    padded = np.pad(img, ((0, 0), (0, 1), (0, 1)), mode="symmetric")
    for ch, stats in zip(padded, channel_energy_stats(img)):
        assert stats.low_energy == pytest.approx(block_energy_fraction(ch), abs=1e-12)


def test_deeper_levels_move_energy_to_high():
    img = np.random.default_rng(2).uniform(0, 1, (3, 16, 16))
    one, two = channel_energy_stats(img, 1), channel_energy_stats(img, 2)
    for a, b in zip(one, two):
        assert b.low_energy <= a.low_energy + 1e-12


@settings(max_examples=30, deadline=None)
@given(img=arrays(np.float64, (3, 6, 8), elements=st.floats(0.01, 1, allow_nan=False)),
       scale=st.floats(0.1, 10))
def test_fractions_sum_to_one_and_ignore_scale(img, scale):
    base, scaled = channel_energy_stats(img), channel_energy_stats(img * scale)
    for a, b in zip(base, scaled):
        assert a.low_energy + a.high_energy == pytest.approx(1.0, abs=1e-6)
        assert b.low_energy == pytest.approx(a.low_energy, abs=1e-9)
        assert b.mean == pytest.approx(a.mean * scale, rel=1e-9)


def test_input_validation():
    with pytest.raises(ValueError, match=r"\[3,H,W\]"):
        channel_energy_stats(np.zeros((4, 4)))
    with pytest.raises(ValueError, match="levels"):
        channel_energy_stats(np.zeros((3, 4, 4)), levels=0)
    with pytest.raises(ValueError, match="channel"):
        spectrum_export(np.zeros((3, 4, 4)), 3)


# -- spectra ----------------------------------------------------------------------

def test_constant_spectrum_is_single_centre_pixel():
    spec = spectrum_export(np.full((3, 8, 8), 0.7), 0)
    expected = np.zeros((8, 8))
    expected[4, 4] = 1.0
    np.testing.assert_allclose(spec, expected, atol=1e-12)


def test_horizontal_sinusoid_has_two_symmetric_bins():
    k, n = 3, 16
    xx = np.arange(n)
    plane = 0.5 + 0.5 * np.cos(2 * np.pi * k * xx / n)
    img = np.broadcast_to(plane, (3, n, n)).copy()
    spec = spectrum_export(img, 1)
    bright = {tuple(ix) for ix in np.argwhere(spec > 1e-9)}
    assert bright == {(n // 2, n // 2), (n // 2, n // 2 + k), (n // 2, n // 2 - k)}
    assert spec[n // 2, n // 2 + k] == pytest.approx(spec[n // 2, n // 2 - k], abs=1e-12)


def test_random_spectrum_is_min_max_normalised():
    spec = spectrum_export(np.random.default_rng(3).uniform(0, 1, (3, 8, 12)), 2)
    assert spec.shape == (8, 16)
    assert spec.max() == 1.0 and spec.min() == 0.0


# -- corpus -------------------------------------------------------------------------

def _write_corpus(directory, images, order):
    directory.mkdir()
    for i in order:
        save_image(images[i], directory / f"img{i:02d}.png")


def test_corpus_report_rows_match_single_image_op(tmp_path):
    rng = np.random.default_rng(4)
    images = [rng.uniform(0, 1, (3, 8, 8)) for _ in range(10)]
    _write_corpus(tmp_path / "d", images, range(10))
    (tmp_path / "d" / "notes.txt").write_text("ignored")
    rows = corpus_report(tmp_path / "d", tmp_path / "r.csv")
    assert len(rows) == 30
    for i in range(10):
        stats = channel_energy_stats(load_image(tmp_path / "d" / f"img{i:02d}.png"))
        for c in range(3):
            name, ch, mean, low, high = rows[3 * i + c]
            assert (name, ch) == (f"img{i:02d}.png", "RGB"[c])
            assert low == stats[c].low_energy and mean == stats[c].mean
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "file,channel,mean,low_energy,high_energy"


def test_corpus_report_is_permutation_invariant_and_deterministic(tmp_path, monkeypatch):
    rng = np.random.default_rng(5)
    images = [rng.uniform(0, 1, (3, 8, 8)) for _ in range(6)]
    _write_corpus(tmp_path / "a", images, [0, 1, 2, 3, 4, 5])
    _write_corpus(tmp_path / "b", images, [5, 3, 1, 0, 4, 2])
    corpus_report(tmp_path / "a", tmp_path / "a.csv")
    monkeypatch.setenv("LALNET_THREADS", "4")
    corpus_report(tmp_path / "b", tmp_path / "b.csv")
    corpus_report(tmp_path / "b", tmp_path / "c.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "b.csv").read_bytes() == (tmp_path / "c.csv").read_bytes()


def test_constant_image_corpus(tmp_path):
    (tmp_path / "d").mkdir()
    save_image(np.full((3, 4, 4), 0.6), tmp_path / "d" / "flat.png")
    rows = corpus_report(tmp_path / "d", tmp_path / "r.csv")
    assert [r[3] for r in rows] == [1.0, 1.0, 1.0]


def test_empty_directory_is_an_error(tmp_path):
    (tmp_path / "d").mkdir()
    with pytest.raises(FileNotFoundError, match="no images found"):
        corpus_report(tmp_path / "d", tmp_path / "r.csv")


def test_undecodable_file_goes_to_sidecar_log(tmp_path):
    (tmp_path / "d").mkdir()
    save_image(np.full((3, 4, 4), 0.2), tmp_path / "d" / "good.png")
    (tmp_path / "d" / "bad.png").write_bytes(b"garbage")
    rows = corpus_report(tmp_path / "d", tmp_path / "r.csv")
    assert {r[0] for r in rows} == {"good.png"}
    assert "bad.png" in (tmp_path / "r.csv.log").read_text()


def test_spectra_are_written_per_channel(tmp_path):
    (tmp_path / "d").mkdir()
    save_image(np.full((3, 4, 4), 0.2), tmp_path / "d" / "flat.png")
    corpus_report(tmp_path / "d", tmp_path / "r.csv", spectra_dir=tmp_path / "s")
    assert sorted(p.name for p in (tmp_path / "s").iterdir()) == ["flat_B-FFT.png", "flat_G-FFT.png",
                                                                  "flat_R-FFT.png"]
