"""PSNR, SSIM and CIELAB colour difference."""

from __future__ import annotations

import numpy as np

from ..numerics import Tensor, no_grad
from ..numerics import functional as F
from ..numerics.transforms import gaussian_valid_matrix

PSNR_CAP = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
K1, K2 = 0.01, 0.03


def _check_pair(a, b) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def psnr(a, b, peak: float = 1.0) -> float:
    a, b = np.asarray(a, np.float64), np.asarray(b, np.float64)
    _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse < 1e-10:
        return PSNR_CAP
    return float(10.0 * np.log10(peak**2 / mse))


def ssim_tensor(a: Tensor, b: Tensor, peak: float = 1.0) -> Tensor:
    """Differentiable single-scale SSIM over [..., H, W], averaged over all windows and channels.

    Gaussian window 11x11, sigma 1.5, no padding; images smaller than the
    window use the largest odd window that fits.
    """
    _check_pair(a, b)
    h, w = a.shape[-2:]
    win = min(SSIM_WINDOW, h - (1 - h % 2), w - (1 - w % 2))
    mh, mw = gaussian_valid_matrix(h, win, SSIM_SIGMA), gaussian_valid_matrix(w, win, SSIM_SIGMA)

    def blur(t):
        return F.linear2d(t, mh, mw)

    c1, c2 = (K1 * peak) ** 2, (K2 * peak) ** 2
    mu_a, mu_b = blur(a), blur(b)
    mu_aa, mu_bb, mu_ab = mu_a * mu_a, mu_b * mu_b, mu_a * mu_b
    var_a = blur(a * a) - mu_aa
    var_b = blur(b * b) - mu_bb
    cov = blur(a * b) - mu_ab
    num = (mu_ab * 2.0 + c1) * (cov * 2.0 + c2)
    den = (mu_aa + mu_bb + c1) * (var_a + var_b + c2)
    return (num / den).mean()


def ssim(a, b, peak: float = 1.0) -> float:
    a, b = np.asarray(a, np.float64), np.asarray(b, np.float64)
    _check_pair(a, b)
    with no_grad():
        return float(ssim_tensor(Tensor(a), Tensor(b), peak).data)


# sRGB (D65) -> XYZ; the white point is taken as the row sums so pure white maps to a* = b* = 0.
_RGB2XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_WHITE = _RGB2XYZ.sum(axis=1)


def srgb_to_lab(image) -> np.ndarray:
    """[3, ...] sRGB in [0,1] -> [3, ...] CIELAB (L*, a*, b*)."""
    c = np.asarray(image, np.float64)
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = np.tensordot(_RGB2XYZ, lin, axes=(1, 0)) / _WHITE.reshape((3,) + (1,) * (c.ndim - 1))
    delta = 6.0 / 29.0
    f = np.where(xyz > delta**3, np.cbrt(xyz), xyz / (3 * delta**2) + 4.0 / 29.0)
    L = 116.0 * f[1] - 16.0
    a = 500.0 * (f[0] - f[1])
    b = 200.0 * (f[1] - f[2])
    return np.stack([L, a, b])


def delta_e(a, b) -> float:
    """Mean CIE76 colour difference between two [3,H,W] (or [B,3,H,W]) sRGB images."""
    a, b = np.asarray(a, np.float64), np.asarray(b, np.float64)
    _check_pair(a, b)
    if a.ndim == 4:
        return float(np.mean([delta_e(x, y) for x, y in zip(a, b)]))
    la, lb = srgb_to_lab(a), srgb_to_lab(b)
    return float(np.mean(np.sqrt(((la - lb) ** 2).sum(axis=0))))
