"""Registry of gradient checks covering every differentiable op and network block.

Each entry builds ``(fn, inputs)`` in float64 for :func:`grad_check`. Block
checks use small configurations and re-randomise every zero-initialised
parameter so that no gradient is structurally zero.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .architecture import ModelConfig, init_params
from .architecture import blocks
from .architecture.model import lalnet_forward
from .numerics import Tensor, grad_check
from .numerics import functional as F
from .training.losses import LossWeights, loss_total
from .training.metrics import ssim_tensor

TOLERANCE = 1e-4
SMALL = dict(base_channels=6, lssm_blocks=1, expansion_factor=2, state_dim=3, mlp_ratio=2,
             detail_channels=4, heads=3, pyramid_levels=2)


def _rand(rng, *shape, lo=None, hi=None) -> Tensor:
    if lo is not None:
        return Tensor(rng.uniform(lo, hi, shape))
    return Tensor(rng.standard_normal(shape))


def _store(config: ModelConfig, rng):
    p = init_params(config, seed=int(rng.integers(1 << 30)), dtype=np.float64)
    for name, t in p.items():
        if np.ptp(t.data) == 0.0:  # zero-init tails, biases, mask bias 1, D = 1, tau
            t.data = t.data + 0.1 * rng.standard_normal(t.shape)
        elif name.endswith("dt_bias"):
            # step sizes of O(0.5) keep A_log gradients well above finite-difference roundoff
            t.data = rng.uniform(-1.0, 0.5, t.shape)
    return p


def _param_inputs(p, prefixes, limit=None):
    names = [n for n in p.names() if any(n.startswith(pre) for pre in prefixes)]
    if limit is not None:
        names = names[:limit]
    return names, [p[n] for n in names]


def _block_check(config, prefixes, forward: Callable, x_inputs, rng, limit=None):
    p = _store(config, rng)
    names, params = _param_inputs(p, prefixes, limit)
    nx = len(x_inputs)

    def fn(*args):
        for n, t in zip(names, args[nx:]):
            p.params[n] = t
        return forward(p, *args[:nx])

    return fn, list(x_inputs) + params


def _ssim_case(rng):
    # Corner pixels reach every valid 11x11 window only through Gaussian tails (~1e-5),
    # so their gradients sit at finite-difference roundoff. Vary a 6x6 core of window
    # centres inside a fixed random border instead; every pixel shares the same code path.
    border = [Tensor(rng.uniform(0, 1, (1, 3, 16, 16))) for _ in range(2)]
    for b in border:
        b.data[..., 5:11, 5:11] = 0.0

    def fn(a, b):
        return ssim_tensor(F.pad2d(a, 5, "zero") + border[0], F.pad2d(b, 5, "zero") + border[1])

    return fn, [_rand(rng, 1, 3, 6, 6, lo=0, hi=1), _rand(rng, 1, 3, 6, 6, lo=0, hi=1)]


def _cases(rng) -> dict[str, Callable[[], tuple]]:
    cfg = ModelConfig(**SMALL)
    x4 = lambda c=3, h=4, w=4: _rand(rng, 2, c, h, w)  # noqa: E731
    return {
        "conv2d": lambda: (lambda x, w, b: F.conv2d(x, w, b), [x4(4), _rand(rng, 5, 4, 3, 3), _rand(rng, 5)]),
        "conv2d_grouped": lambda: (lambda x, w, b: F.conv2d(x, w, b, groups=2, padding="zero"),
                                   [x4(4), _rand(rng, 6, 2, 3, 3), _rand(rng, 6)]),
        "conv2d_stride2": lambda: (lambda x, w: F.conv2d(x, w, None, stride=2), [x4(2, 6, 6), _rand(rng, 3, 2, 3, 3)]),
        "pad2d": lambda: (lambda x: F.pad2d(x, 2, "reflect") ** 2, [x4(2, 4, 5)]),
        "resample_up": lambda: (F.up2x, [x4(2, 3, 4)]),
        "resample_down": lambda: (F.down2x, [x4(2, 4, 6)]),
        "fft2": lambda: (F.fft2, [x4(2, 4, 8)]),
        "ifft2_real": lambda: (F.ifft2_real, [_rand(rng, 2, 2, 2, 4, 4)]),
        "haar_dwt": lambda: (lambda x: F.haar_dwt(x) ** 2, [x4(2, 4, 6)]),
        "haar_idwt": lambda: (lambda x: F.haar_idwt(x) ** 2, [x4(8, 2, 3)]),
        "silu": lambda: (F.silu, [x4()]),
        "sigmoid": lambda: (F.sigmoid, [x4()]),
        "softplus": lambda: (F.softplus, [x4()]),
        "softmax": lambda: (lambda x: F.softmax(x, axis=1), [x4(5)]),
        "layer_norm": lambda: (lambda x, g, b: F.layer_norm(x, g, b), [x4(5), _rand(rng, 5), _rand(rng, 5)]),
        "hadamard": lambda: (F.hadamard, [x4(), x4()]),
        "matmul": lambda: (lambda a, b: a @ b, [_rand(rng, 2, 3, 4), _rand(rng, 4, 5)]),
        "selective_scan": lambda: (F.selective_scan, [
            _rand(rng, 2, 3, 5), _rand(rng, 2, 3, 5, lo=0.1, hi=1.0), _rand(rng, 3, 4, lo=-2.0, hi=-0.5),
            _rand(rng, 2, 4, 5), _rand(rng, 2, 4, 5), _rand(rng, 3)]),
        "cab": lambda: _block_check(cfg, ["ddcm.cab"], lambda p, x: blocks.cab_forward(x, p), [x4(6)], rng),
        "ddcm": lambda: _block_check(cfg, ["ddcm"], lambda p, x: blocks.ddcm_forward(x, p), [x4(3, 8, 8)], rng),
        "mcm": lambda: _block_check(cfg, ["mcm"], lambda p, x: blocks.mcm_forward(x, p), [x4(3)], rng),
        "ss2d": lambda: _block_check(cfg, ["lssm0.ss2"], lambda p, x: blocks.ss2d_forward(x, p, "lssm0.ss2"),
                                     [_rand(rng, 1, 6, 3, 2)], rng),
        # SS2D parameters inside LSSM are covered by the "ss2d" entry
        "lssm": lambda: _block_check(cfg, ["lssm0.in_proj", "lssm0.expand", "lssm0.dw", "lssm0.ln", "lssm0.proj",
                                           "lssm0.mlp"],
                                     lambda p, a, b: blocks.lssm_forward(a, b, p, "lssm0", residual=False),
                                     [x4(6), x4(6)], rng),
        "lga": lambda: _block_check(cfg, ["lga"], lambda p, a, b: blocks.lga_forward(a, b, p, cfg.heads),
                                    [x4(6), x4(6)], rng),
        "ldp": lambda: _block_check(cfg, ["ldp"], lambda p, x: blocks.ldp_decompose(x, p, 2).hf[0]
                                    + F.up2x(blocks.ldp_decompose(x, p, 2).hf[1]), [x4(3, 8, 8)], rng),
        "ide": lambda: _block_check(cfg, ["ide"], lambda p, y, h0, h1: blocks.ide_refine(
            y, blocks.PyramidDecomposition([h0, h1], y), p), [x4(3, 2, 2), x4(3, 8, 8), x4(3, 4, 4)], rng),
        "lalnet": lambda: _block_check(cfg, ["ddcm.freq", "ddcm.cab", "cs.", "mcm.conv_out", "lssm0.proj", "lga.tau",
                                             "head.weight", "ide0.conv2", "ldp1.conv1"],
                                       lambda p, x: lalnet_forward(x, p, cfg),
                                       [_rand(rng, 1, 3, 32, 32, lo=0.0, hi=1.0)], rng),
        "ssim": lambda: _ssim_case(rng),
        "loss_total": lambda: (lambda a, b: loss_total(a, b, [a * 0.5], [b * 0.5], LossWeights()),
                               [_rand(rng, 1, 3, 12, 12, lo=0, hi=1), _rand(rng, 1, 3, 12, 12, lo=0, hi=1)]),
    }


def available_checks() -> list[str]:
    return list(_cases(np.random.default_rng(0)))


def run_check(name: str, seed: int = 0, h: float = 1e-5, max_coords: int = 64) -> float:
    cases = _cases(np.random.default_rng(seed))
    if name not in cases:
        raise KeyError(f"unknown gradient check {name!r}; choose from {sorted(cases)}")
    fn, inputs = cases[name]()
    return grad_check(fn, inputs, h=h, max_coords=max_coords, seed=seed)


def run_all(seed: int = 0, names=None) -> dict[str, float]:
    return {name: run_check(name, seed) for name in (names or available_checks())}
