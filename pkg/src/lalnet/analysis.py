"""Per-channel energy statistics and Fourier spectra of images and corpora."""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import list_images, load_image, save_image
from .numerics import transforms as tf

log = logging.getLogger(__name__)

CHANNEL_NAMES = ("R", "G", "B")
REPORT_COLUMNS = ("file", "channel", "mean", "low_energy", "high_energy")


@dataclass(frozen=True)
class ChannelEnergy:
    mean: float
    low_energy: float
    high_energy: float
    degenerate: bool = False


@dataclass(frozen=True)
class ChannelEnergyReport:
    channels: tuple  # (R, G, B) ChannelEnergy

    def __getitem__(self, i: int) -> ChannelEnergy:
        return self.channels[i]

    def __iter__(self):
        return iter(self.channels)


def _pad_even(x: np.ndarray) -> np.ndarray:
    h, w = x.shape[-2:]
    if h % 2 == 0 and w % 2 == 0:
        return x
    pad = [(0, 0)] * (x.ndim - 2) + [(0, h % 2), (0, w % 2)]
    return np.pad(x, pad, mode="symmetric")


def channel_energy_stats(image, levels: int = 1) -> ChannelEnergyReport:
    """Low/high-frequency energy split of each channel under the orthonormal Haar DWT.

    ``low_energy`` is the share of squared coefficients in the final
    approximation band; detail bands of every level count as high frequency.
    Odd extents are padded symmetrically. An all-zero channel reports
    ``low_energy = 1`` and is flagged degenerate.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 3 or img.shape[0] != 3:
        raise ValueError(f"expected a [3,H,W] image, got shape {img.shape}")
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    out = []
    for ch in img:
        mean = float(ch.mean())
        approx = ch
        high = 0.0
        for _ in range(levels):
            approx = _pad_even(approx)
            approx, cH, cV, cD = tf.dwt2_haar(approx)
            high += float((cH**2).sum() + (cV**2).sum() + (cD**2).sum())
        low = float((approx**2).sum())
        total = low + high
        if total == 0.0:
            out.append(ChannelEnergy(mean, 1.0, 0.0, degenerate=True))
        else:
            out.append(ChannelEnergy(mean, low / total, high / total))
    return ChannelEnergyReport(tuple(out))


def spectrum_export(image, channel: int) -> np.ndarray:
    """Log-magnitude spectrum ``log(1+|S|)`` of one channel, DC centred, min-max scaled to [0,1]."""
    img = np.asarray(image, dtype=np.float64)
    if channel not in (0, 1, 2):
        raise ValueError(f"channel must be 0, 1 or 2, got {channel}")
    plane, _ = tf.pad_to_pow2(img[channel])
    mag = np.log1p(tf.fft2(plane).magnitude())
    mag = tf.fftshift2(mag)
    lo, hi = mag.min(), mag.max()
    if hi - lo <= 0:
        return np.zeros_like(mag)
    return (mag - lo) / (hi - lo)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LALNET_THREADS", "1")))
    except ValueError:
        return 1


def _analyze_file(path: Path, levels: int):
    try:
        img = load_image(path)
    except Exception as exc:  # noqa: BLE001 - any decode failure skips the file
        return path, None, f"{path.name}: {exc}"
    return path, (img, channel_energy_stats(img, levels)), None


def corpus_report(directory, out, levels: int = 1, spectra_dir=None) -> list[tuple]:
    """Write one CSV row per (file, channel) for every decodable image in ``directory``.

    Files are processed in lexicographic order; undecodable files are skipped
    and listed in ``<out>.log``. Returns the rows written.
    """
    directory = Path(directory)
    files = list_images(directory)
    if not files:
        raise FileNotFoundError(f"no images found in {directory}")
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda f: _analyze_file(f, levels), files))

    rows, warnings = [], []
    for path, payload, warning in sorted(results, key=lambda r: r[0].name):
        if payload is None:
            warnings.append(warning)
            log.warning("skipped %s", warning)
            continue
        img, report = payload
        for ci, stats in enumerate(report):
            rows.append((path.name, CHANNEL_NAMES[ci], stats.mean, stats.low_energy, stats.high_energy))
        if spectra_dir is not None:
            Path(spectra_dir).mkdir(parents=True, exist_ok=True)
            for ci in range(3):
                save_image(spectrum_export(img, ci), Path(spectra_dir) / f"{path.stem}_{CHANNEL_NAMES[ci]}-FFT.png")
    if not rows:
        raise FileNotFoundError(f"no images found in {directory} (all files failed to decode)")

    out = Path(out)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for name, ch, mean, low, high in rows:
            w.writerow([name, ch, repr(mean), repr(low), repr(high)])
    log_path = out.with_name(out.name + ".log")
    if warnings:
        log_path.write_text("\n".join(warnings) + "\n", encoding="utf-8")
    elif log_path.exists():
        log_path.unlink()
    return rows
