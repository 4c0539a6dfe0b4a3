"""Full network assembly."""

from __future__ import annotations

import numpy as np

from ..numerics import Tensor, no_grad
from ..numerics import functional as F
from ..numerics.transforms import is_pow2
from . import blocks
from .config import ModelConfig
from .params import ParamStore, check_params, param_specs


def light_adaptation(x_lf: Tensor, p: ParamStore, config: ModelConfig) -> Tensor:
    """Low-resolution light adaptation: returns Y_LF with the same shape as ``x_lf``."""
    if config.use_ddcm:
        f_cs0 = blocks.ddcm_forward(x_lf, p)
    else:
        f_cs0 = blocks.ddcm_alt_forward(x_lf, p)
    f_cs = blocks.conv(f_cs0, p, "cs", groups=3 if config.gconv_separated else 1)

    f_cm = blocks.mcm_forward(x_lf, p) if config.use_mcm else blocks.mcm_alt_forward(x_lf, p)
    for b in range(config.lssm_blocks):
        if config.use_lssm:
            f_cm = blocks.lssm_forward(f_cm, f_cs, p, f"lssm{b}", use_ss2d=config.use_ss2d)
        else:
            f_cm = blocks.lssm_alt_forward(f_cm, f_cs, p, f"lssm{b}")

    if config.use_lga:
        f_la = blocks.lga_forward(f_cm, f_cs, p, config.heads)
    else:
        f_la = f_cm + f_cs
    return blocks.conv(f_la, p, "head") + x_lf


def lalnet_forward(x: Tensor, p: ParamStore, config: ModelConfig, return_pyramid: bool = False):
    """Enhance a [B,3,H,W] batch. H and W must be divisible by 2^L with a power-of-two
    low-frequency size; use :func:`enhance` for arbitrary sizes."""
    if x.ndim != 4 or x.shape[1] != 3:
        raise ValueError(f"expected input [B,3,H,W], got {x.shape}")
    h, w = x.shape[-2:]
    m = config.multiple
    if h % m or w % m:
        raise ValueError(f"input {h}x{w} not divisible by 2^L={m}")
    low = min_low_size(config)
    if h // m < low or w // m < low:
        raise ValueError(f"low-frequency size {h // m}x{w // m} below the minimum {low}x{low}; "
                         f"input must be at least {low * m}x{low * m} for L={config.pyramid_levels}")
    if config.use_ddcm and not (is_pow2(h // m) and is_pow2(w // m)):
        raise ValueError(f"low-frequency size {h // m}x{w // m} is not a power of two")
    check_params(p, config)
    pyramid = blocks.ldp_decompose(x, p, config.pyramid_levels)
    y_lf = light_adaptation(pyramid.lf, p, config)
    y = blocks.ide_refine(y_lf, pyramid, p)
    if return_pyramid:
        return y, pyramid
    return y


def min_low_size(config: ModelConfig) -> int:
    # reflect-padded 3x3 convs need extent >= 2; MCM convolves again after halving
    return 4 if config.use_mcm else 2


def valid_size(n: int, config: ModelConfig) -> int:
    """Smallest extent >= n accepted by :func:`lalnet_forward`."""
    m = config.multiple
    low = max(min_low_size(config), -(-n // m))
    if config.use_ddcm:
        low = 1 << (low - 1).bit_length()
    return low * m


def enhance(image: np.ndarray, p: ParamStore, config: ModelConfig) -> np.ndarray:
    """Run the model on [3,H,W] or [B,3,H,W] arrays of any size via reflect pad and crop."""
    single = image.ndim == 3
    arr = image[None] if single else image
    h, w = arr.shape[-2:]
    th, tw = valid_size(h, config), valid_size(w, config)
    pad = ((0, 0), (0, 0), (0, th - h), (0, tw - w))
    mode = "reflect" if th - h < h and tw - w < w else "symmetric"
    padded = np.pad(arr, pad, mode=mode) if (th, tw) != (h, w) else arr
    with no_grad():
        out = lalnet_forward(Tensor(padded.astype(p.dtype)), p, config).data
    out = out[..., :h, :w]
    return out[0] if single else out


def count_parameters(p: ParamStore) -> int:
    return p.num_params()


def expected_parameter_count(config: ModelConfig) -> int:
    return int(sum(np.prod(s.shape) for s in param_specs(config)))
