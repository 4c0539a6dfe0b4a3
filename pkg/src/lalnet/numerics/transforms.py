"""Array-level transform kernels: radix-2 FFT, orthonormal Haar DWT, resampling.

These functions work on plain numpy arrays and transform the trailing two
axes. The differentiable wrappers live in :mod:`lalnet.numerics.functional`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass
class ComplexPlane:
    """Real and imaginary parts of a transformed plane."""

    real: np.ndarray
    imag: np.ndarray

    def __post_init__(self):
        if self.real.shape != self.imag.shape:
            raise ValueError(f"real/imag shape mismatch: {self.real.shape} vs {self.imag.shape}")

    @property
    def shape(self):
        return self.real.shape

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.real, self.imag)

    def to_complex(self) -> np.ndarray:
        return self.real + 1j * self.imag


def is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


# -- FFT ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def _bit_reverse(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def _fft_last_axis(z: np.ndarray, inverse: bool) -> np.ndarray:
    """Iterative decimation-in-time radix-2 FFT along the last axis (unnormalized)."""
    n = z.shape[-1]
    if not is_pow2(n):
        raise ValueError(f"FFT extent {n} is not a power of two; pad with pad_to_pow2 first")
    lead = z.shape[:-1]
    x = np.ascontiguousarray(z[..., _bit_reverse(n)], dtype=np.complex128)
    sign = 1.0 if inverse else -1.0
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(sign * 2j * np.pi * np.arange(half) / size)
        x = x.reshape(lead + (n // size, size))
        even = x[..., :half]
        odd = x[..., half:] * tw
        x = np.concatenate([even + odd, even - odd], axis=-1)
        size *= 2
    return x.reshape(lead + (n,))


def _fft2_complex(z: np.ndarray, inverse: bool = False) -> np.ndarray:
    z = _fft_last_axis(z, inverse)
    z = _fft_last_axis(np.swapaxes(z, -1, -2), inverse)
    return np.swapaxes(z, -1, -2)


def fft2(x: np.ndarray) -> ComplexPlane:
    """Unnormalized forward 2D DFT over the last two axes of a real array."""
    x = np.asarray(x)
    z = _fft2_complex(x.astype(np.complex128))
    return ComplexPlane(z.real.astype(x.dtype, copy=False), z.imag.astype(x.dtype, copy=False))


def ifft2(plane: ComplexPlane) -> ComplexPlane:
    """Inverse 2D DFT, scaled by 1/(H*W)."""
    h, w = plane.shape[-2:]
    z = _fft2_complex(plane.to_complex(), inverse=True) / (h * w)
    dt = plane.real.dtype
    return ComplexPlane(z.real.astype(dt, copy=False), z.imag.astype(dt, copy=False))


def fftshift2(x: np.ndarray) -> np.ndarray:
    """Swap quadrants so the zero-frequency bin sits at (H//2, W//2)."""
    h, w = x.shape[-2:]
    return np.roll(x, (h // 2, w // 2), axis=(-2, -1))


def pad_to_pow2(x: np.ndarray) -> tuple[np.ndarray, tuple[int, int]]:
    """Symmetric-pad the last two axes up to powers of two.

    Returns the padded array and the original (H, W) for cropping.
    """
    h, w = x.shape[-2:]
    ph, pw = next_pow2(h) - h, next_pow2(w) - w
    if ph == 0 and pw == 0:
        return x, (h, w)
    pad = [(0, 0)] * (x.ndim - 2) + [(ph // 2, ph - ph // 2), (pw // 2, pw - pw // 2)]
    return np.pad(x, pad, mode="symmetric"), (h, w)


# -- Haar DWT -----------------------------------------------------------------

def dwt2_haar(x: np.ndarray):
    """One level of the orthonormal 2D Haar transform.

    For each 2x2 block ``[a b; c d]`` returns ``cA=(a+b+c+d)/2``,
    ``cH=(a-b+c-d)/2``, ``cV=(a+b-c-d)/2`` and ``cD=(a-b-c+d)/2``.
    """
    x = np.asarray(x)
    h, w = x.shape[-2:]
    if h % 2 or w % 2:
        raise ValueError(f"Haar DWT needs even extents, got {h}x{w}")
    a = x[..., 0::2, 0::2]
    b = x[..., 0::2, 1::2]
    c = x[..., 1::2, 0::2]
    d = x[..., 1::2, 1::2]
    return (
        (a + b + c + d) * 0.5,
        (a - b + c - d) * 0.5,
        (a + b - c - d) * 0.5,
        (a - b - c + d) * 0.5,
    )


def idwt2_haar(cA, cH, cV, cD) -> np.ndarray:
    """Inverse of :func:`dwt2_haar` (the transform is its own adjoint)."""
    cA = np.asarray(cA)
    h, w = cA.shape[-2:]
    out = np.empty(cA.shape[:-2] + (2 * h, 2 * w), dtype=np.result_type(cA, cH, cV, cD))
    out[..., 0::2, 0::2] = (cA + cH + cV + cD) * 0.5
    out[..., 0::2, 1::2] = (cA - cH + cV - cD) * 0.5
    out[..., 1::2, 0::2] = (cA + cH - cV - cD) * 0.5
    out[..., 1::2, 1::2] = (cA - cH - cV + cD) * 0.5
    return out


# -- separable linear operators ----------------------------------------------

@lru_cache(maxsize=None)
def upsample_matrix(n: int) -> np.ndarray:
    """(2n, n) bilinear 2x upsampling matrix, half-pixel centers, edge clamped."""
    m = np.zeros((2 * n, n))
    for o in range(2 * n):
        src = (o + 0.5) / 2.0 - 0.5
        i0 = int(np.floor(src))
        frac = src - i0
        lo = min(max(i0, 0), n - 1)
        hi = min(max(i0 + 1, 0), n - 1)
        m[o, lo] += 1.0 - frac
        m[o, hi] += frac
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def downsample_matrix(n: int) -> np.ndarray:
    """(n/2, n) 2x average-pooling matrix."""
    if n % 2:
        raise ValueError(f"2x downsampling needs an even extent, got {n}")
    m = np.zeros((n // 2, n))
    for i in range(n // 2):
        m[i, 2 * i] = m[i, 2 * i + 1] = 0.5
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def pad_matrix(n: int, before: int, after: int, mode: str) -> np.ndarray:
    """(n+before+after, n) selection matrix realising reflect or zero padding."""
    if mode not in ("reflect", "zero"):
        raise ValueError(f"unknown padding mode {mode!r}")
    if mode == "reflect" and max(before, after) >= n:
        raise ValueError(f"reflect padding of {max(before, after)} needs extent > pad, got {n}")
    m = np.zeros((n + before + after, n))
    for o in range(n + before + after):
        i = o - before
        if 0 <= i < n:
            m[o, i] = 1.0
        elif mode == "reflect":
            j = -i if i < 0 else 2 * (n - 1) - i
            m[o, j] = 1.0
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def gaussian_valid_matrix(n: int, size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """(n-size+1, n) matrix applying a normalized 1D Gaussian with no padding."""
    if n < size:
        raise ValueError(f"extent {n} smaller than Gaussian window {size}")
    t = np.arange(size) - (size - 1) / 2.0
    k = np.exp(-(t**2) / (2 * sigma**2))
    k /= k.sum()
    m = np.zeros((n - size + 1, n))
    for i in range(n - size + 1):
        m[i, i : i + size] = k
    m.setflags(write=False)
    return m


def apply_separable(x: np.ndarray, mh: np.ndarray, mw: np.ndarray) -> np.ndarray:
    """Compute ``mh @ x @ mw.T`` over the last two axes."""
    return mh @ x @ mw.T


def resample2x_array(x: np.ndarray, direction: str) -> np.ndarray:
    h, w = x.shape[-2:]
    if direction == "up":
        mh, mw = upsample_matrix(h), upsample_matrix(w)
    elif direction == "down":
        mh, mw = downsample_matrix(h), downsample_matrix(w)
    else:
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    return apply_separable(x, mh.astype(x.dtype), mw.astype(x.dtype))
