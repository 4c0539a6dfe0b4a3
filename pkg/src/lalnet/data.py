"""Image I/O, synthetic light degradations, procedural clean images and patch sampling.

Images are float arrays laid out [3, H, W] with values nominally in [0, 1].
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError

DEGRADATION_KINDS = ("under_exposure", "over_exposure", "gamma", "tone_compress", "low_light_noise")
IMAGE_SUFFIXES = (".png", ".pfm")


class ImageFormatError(ValueError):
    """File extension or magic is not a supported image format."""


class ImageHeaderError(ValueError):
    """Header of a supported format is malformed."""


# -- I/O --------------------------------------------------------------------------

def _read_pfm(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    # three whitespace-terminated header tokens: id, "W H", scale
    m = re.match(rb"(P[Ff])\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s", raw)
    if not m:
        raise ImageHeaderError(f"{path}: corrupt PFM header")
    ident, w, h, scale = m.group(1), int(m.group(2)), int(m.group(3)), float(m.group(4))
    channels = 3 if ident == b"PF" else 1
    endian = "<" if scale < 0 else ">"
    count = w * h * channels
    payload = raw[m.end():]
    if len(payload) < 4 * count:
        raise ImageHeaderError(f"{path}: PFM payload shorter than header declares")
    data = np.frombuffer(payload[:4 * count], dtype=f"{endian}f4").reshape(h, w, channels)
    data = data[::-1]                                     # PFM rows run bottom-to-top
    if channels == 1:
        data = np.repeat(data, 3, axis=2)
    return np.ascontiguousarray(data.transpose(2, 0, 1), dtype=np.float32)


def _write_pfm(path: Path, image: np.ndarray) -> None:
    c, h, w = image.shape
    hwc = np.ascontiguousarray(image.transpose(1, 2, 0)[::-1], dtype="<f4")
    header = f"PF\n{w} {h}\n-1.0\n".encode("ascii")
    path.write_bytes(header + hwc.tobytes())


def load_image(path) -> np.ndarray:
    """Decode a PNG (8-bit, scaled by 1/255) or PFM (float passthrough) to [3,H,W] float32."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pfm":
        return _read_pfm(path)
    if suffix != ".png":
        raise ImageFormatError(f"{path}: unsupported image format {suffix!r}")
    try:
        with Image.open(path) as im:
            if im.format != "PNG":
                raise ImageFormatError(f"{path}: not a PNG file")
            arr = np.asarray(im.convert("RGB"), dtype=np.float32) / 255.0
    except UnidentifiedImageError as exc:
        raise ImageHeaderError(f"{path}: corrupt PNG header") from exc
    return np.ascontiguousarray(arr.transpose(2, 0, 1))


def quantize(image: np.ndarray) -> np.ndarray:
    """[0,1] floats to uint8 with round-half-up."""
    return np.floor(np.clip(image, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_image(image: np.ndarray, path) -> None:
    path = Path(path)
    image = np.asarray(image)
    if image.ndim == 2:
        image = np.repeat(image[None], 3, axis=0)
    suffix = path.suffix.lower()
    if suffix == ".pfm":
        _write_pfm(path, image)
    elif suffix == ".png":
        Image.fromarray(quantize(image).transpose(1, 2, 0), mode="RGB").save(path, format="PNG")
    else:
        raise ImageFormatError(f"{path}: unsupported image format {suffix!r}")


def list_images(directory) -> list[Path]:
    return sorted(p for p in Path(directory).iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


# -- degradations -----------------------------------------------------------------

@dataclass(frozen=True)
class DegradationSpec:
    kind: str
    ev: float = 0.0
    gamma: float = 1.0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DEGRADATION_KINDS:
            raise ValueError(f"unknown degradation kind {self.kind!r}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


def degrade(clean: np.ndarray, spec: DegradationSpec) -> np.ndarray:
    """Apply a synthetic lighting degradation to a [3,H,W] image in [0,1].

    * ``under_exposure`` / ``over_exposure``: ``clip(x * 2**ev)``
    * ``gamma``: ``x ** gamma``
    * ``tone_compress``: expand by ``2**ev`` then Reinhard ``x / (1 + x)``
    * ``low_light_noise``: ``clip(x * 2**ev + N(0, sigma))`` with a seeded generator
    """
    x = np.asarray(clean, dtype=np.float64)
    if spec.kind in ("under_exposure", "over_exposure"):
        out = np.clip(x * 2.0**spec.ev, 0.0, 1.0)
    elif spec.kind == "gamma":
        out = np.power(x, spec.gamma)
    elif spec.kind == "tone_compress":
        hdr = x * 2.0**spec.ev
        out = hdr / (1.0 + hdr)
    else:
        rng = np.random.default_rng(spec.seed)
        out = np.clip(x * 2.0**spec.ev + rng.normal(0.0, spec.noise_sigma, x.shape), 0.0, 1.0)
    return out.astype(np.asarray(clean).dtype if np.asarray(clean).dtype.kind == "f" else np.float32)


def random_degradation(rng: np.random.Generator, kinds=("exposure", "gamma", "tone_compress")) -> DegradationSpec:
    """Draw a degradation from the toy mixture: EV in [-1.5, 1.5], gamma in [1.8, 2.4], tone compression."""
    kind = kinds[rng.integers(len(kinds))]
    seed = int(rng.integers(2**31))
    if kind == "exposure":
        ev = float(rng.uniform(-1.5, 1.5))
        return DegradationSpec("under_exposure" if ev < 0 else "over_exposure", ev=ev, seed=seed)
    if kind == "gamma":
        return DegradationSpec("gamma", gamma=float(rng.uniform(1.8, 2.4)), seed=seed)
    if kind == "tone_compress":
        return DegradationSpec("tone_compress", ev=float(rng.uniform(0.0, 1.0)), seed=seed)
    if kind == "low_light_noise":
        return DegradationSpec("low_light_noise", ev=float(rng.uniform(-2.5, -1.0)),
                               noise_sigma=float(rng.uniform(0.005, 0.02)), seed=seed)
    raise ValueError(f"unknown degradation family {kind!r}")


# -- procedural clean images --------------------------------------------------------

def procedural_image(rng: np.random.Generator, size: int = 32) -> np.ndarray:
    """A multi-frequency colour field: smooth sinusoid mix, a few soft-edged shapes, fine texture."""
    yy, xx = np.mgrid[0:size, 0:size] / size
    lum = np.zeros((size, size))
    for _ in range(4):
        fx, fy = rng.uniform(-3, 3, 2)
        lum += rng.uniform(0.3, 1.0) * np.sin(2 * np.pi * (fx * xx + fy * yy) + rng.uniform(0, 2 * np.pi))
    lum = 0.5 + 0.18 * lum / 2.0
    chroma = rng.uniform(0.7, 1.3, 3)
    img = np.stack([lum * c for c in chroma])
    for _ in range(int(rng.integers(1, 4))):
        cy, cx = rng.uniform(0.1, 0.9, 2)
        r = rng.uniform(0.08, 0.3)
        d = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
        blob = 1.0 / (1.0 + np.exp((d - r) * size / 1.5))
        img += blob[None] * rng.uniform(-0.3, 0.3, (3, 1, 1))
    img += 0.03 * np.sin(2 * np.pi * rng.uniform(4, 10) * (xx + yy))[None]
    return np.clip(img, 0.02, 0.98).astype(np.float32)


@dataclass
class PairedCorpus:
    degraded: np.ndarray      # [N,3,H,W]
    clean: np.ndarray         # [N,3,H,W]
    kinds: list

    def __len__(self) -> int:
        return len(self.clean)


def make_toy_corpus(count: int = 64, size: int = 32, seed: int = 0,
                    kinds=("exposure", "gamma", "tone_compress")) -> PairedCorpus:
    """Procedural clean images with one random degradation each, deterministic per seed."""
    rng = np.random.default_rng(seed)
    clean, degraded, names = [], [], []
    for _ in range(count):
        img = procedural_image(rng, size)
        spec = random_degradation(rng, kinds)
        clean.append(img)
        degraded.append(degrade(img, spec))
        names.append(spec.kind)
    return PairedCorpus(np.stack(degraded), np.stack(clean), names)


def corpus_from_images(images: list, seed: int = 0, kinds=("exposure", "gamma", "tone_compress")) -> PairedCorpus:
    rng = np.random.default_rng(seed)
    degraded, names = [], []
    for img in images:
        spec = random_degradation(rng, kinds)
        degraded.append(degrade(img, spec))
        names.append(spec.kind)
    return PairedCorpus(np.stack(degraded), np.stack(images), names)


# -- manifests --------------------------------------------------------------------------

MANIFEST_COLUMNS = ("clean_path", "degraded_path", "kind")


def write_manifest(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(MANIFEST_COLUMNS)
        for row in rows:
            w.writerow(row)


def read_manifest(path) -> list[tuple[Path, Path, str]]:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: manifest missing columns {sorted(missing)}")
        rows = []
        for r in reader:
            rows.append((path.parent / r["clean_path"], path.parent / r["degraded_path"], r["kind"]))
    return rows


def load_manifest_corpus(path) -> PairedCorpus:
    rows = read_manifest(path)
    clean = [load_image(c) for c, _, _ in rows]
    degraded = [load_image(d) for _, d, _ in rows]
    shapes = {c.shape for c in clean} | {d.shape for d in degraded}
    if len(shapes) != 1:
        raise ValueError(f"manifest images differ in shape: {sorted(shapes)}")
    return PairedCorpus(np.stack(degraded), np.stack(clean), [k for _, _, k in rows])


# -- patches ----------------------------------------------------------------------------

class Patch(NamedTuple):
    degraded: np.ndarray
    clean: np.ndarray
    origin: tuple  # (y, x) of the top-left corner


def sample_patches(pair, size: int, count: int, seed: int, levels: int = 3):
    """Crop ``count`` aligned (degraded, clean) patches at seeded uniform positions."""
    degraded, clean = pair
    if degraded.shape != clean.shape:
        raise ValueError(f"pair shapes differ: {degraded.shape} vs {clean.shape}")
    if size % (2**levels):
        raise ValueError(f"patch size {size} not divisible by 2^{levels}")
    h, w = clean.shape[-2:]
    if h < size or w < size:
        raise ValueError(f"image {h}x{w} smaller than patch size {size}")
    rng = np.random.default_rng(seed)
    ys = rng.integers(0, h - size + 1, count)
    xs = rng.integers(0, w - size + 1, count)
    return [Patch(degraded[..., y:y + size, x:x + size], clean[..., y:y + size, x:x + size], (int(y), int(x)))
            for y, x in zip(ys, xs)]
