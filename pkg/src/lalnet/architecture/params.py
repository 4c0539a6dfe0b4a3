"""Parameter layout, initialisation and the named parameter store."""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..numerics import Tensor
from .config import ModelConfig


class MissingParameterError(KeyError):
    def __str__(self) -> str:
        return f"missing parameter {self.args[0]!r}"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    shape: tuple
    init: str = "fan_in"     # fan_in | zeros | ones | const:<v> | a_log | dt_bias
    fan_in: int = 1


class ParamStore:
    """Ordered name -> Tensor map plus Adam moments and step counter."""

    def __init__(self, params=None, config: ModelConfig | None = None):
        self.params: OrderedDict[str, Tensor] = OrderedDict()
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.step = 0
        self.config = config
        for name, value in (params or {}).items():
            self[name] = value

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self.params[name]
        except KeyError:
            raise MissingParameterError(name) from None

    def __setitem__(self, name: str, value) -> None:
        t = value if isinstance(value, Tensor) else Tensor(np.asarray(value))
        t.requires_grad = True
        t.name = name
        self.params[name] = t

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def __iter__(self) -> Iterator[str]:
        return iter(self.params)

    def __len__(self) -> int:
        return len(self.params)

    def items(self):
        return self.params.items()

    def names(self) -> list[str]:
        return list(self.params)

    def num_params(self) -> int:
        return int(sum(t.size for t in self.params.values()))

    def zero_grad(self) -> None:
        for t in self.params.values():
            t.grad = None

    def astype(self, dtype) -> "ParamStore":
        out = ParamStore({k: Tensor(t.data.astype(dtype)) for k, t in self.items()}, self.config)
        out.m = {k: v.astype(dtype) for k, v in self.m.items()}
        out.v = {k: v.astype(dtype) for k, v in self.v.items()}
        out.step = self.step
        return out

    def copy(self) -> "ParamStore":
        return self.astype(self.dtype) if self.params else ParamStore(config=self.config)

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype


def _conv(specs, name, cout, cin_g, k, bias_init="zeros", weight_init="fan_in", bias=True):
    specs.append(ParamSpec(f"{name}.weight", (cout, cin_g, k, k), weight_init, cin_g * k * k))
    if bias:
        specs.append(ParamSpec(f"{name}.bias", (cout,), bias_init))


def _ss2d(specs, name, d, n):
    specs += [
        ParamSpec(f"{name}.dt_weight", (4, d, d), "fan_in", d),
        ParamSpec(f"{name}.dt_bias", (4, d), "dt_bias"),
        ParamSpec(f"{name}.B_weight", (4, n, d), "fan_in", d),
        ParamSpec(f"{name}.C_weight", (4, n, d), "fan_in", d),
        ParamSpec(f"{name}.A_log", (4, d, n), "a_log"),
        ParamSpec(f"{name}.D", (4, d), "ones"),
    ]


def _resblock(specs, name, c):
    _conv(specs, f"{name}.conv1", c, c, 3)
    _conv(specs, f"{name}.conv2", c, c, 3)


def param_specs(config: ModelConfig) -> list[ParamSpec]:
    """Every learnable tensor the forward pass of ``config`` touches, in order."""
    C, g, E, N = config.base_channels, config.group_channels, config.expanded_channels, config.state_dim
    h = config.detail_channels
    specs: list[ParamSpec] = []

    for lvl in range(config.pyramid_levels):
        _conv(specs, f"ldp{lvl}.conv1", h, 3, 3)
        _conv(specs, f"ldp{lvl}.conv2", 3, h, 3, weight_init="zeros")

    if config.use_ddcm:
        # R/I planes of the three colours are six groups of one channel each. No bias:
        # a constant on a spectral plane is a spatial impulse at the origin.
        _conv(specs, "ddcm.freq", 6 * g, 1, 3, bias=False)
        _conv(specs, "ddcm.cab.squeeze", config.cab_hidden, C, 1)
        _conv(specs, "ddcm.cab.excite", C, config.cab_hidden, 1)
    else:
        _conv(specs, "ddcm_alt.conv1", C, 1, 3)
        _conv(specs, "ddcm_alt.conv2", C, g, 3)

    _conv(specs, "cs", C, g if config.gconv_separated else C, 3)

    if config.use_mcm:
        _conv(specs, "mcm.conv_in", C, 3, 3)
        _conv(specs, "mcm.conv_out", C, 4 * C, 3)
    else:
        _conv(specs, "mcm_alt.conv1", C, 3, 3)
        _conv(specs, "mcm_alt.conv2", C, C, 3)

    for b in range(config.lssm_blocks):
        pre = f"lssm{b}"
        if not config.use_lssm:
            _resblock(specs, f"{pre}.res", C)
            continue
        _conv(specs, f"{pre}.in_proj", 2 * C, C, 1)
        _conv(specs, f"{pre}.expand", E, C, 1)
        _conv(specs, f"{pre}.dw", E, 1, 3)
        if config.use_ss2d:
            _ss2d(specs, f"{pre}.ss1", E, N)
        else:
            _resblock(specs, f"{pre}.ss1", E)
        specs += [ParamSpec(f"{pre}.ln1.gamma", (E,), "ones"), ParamSpec(f"{pre}.ln1.beta", (E,), "zeros")]
        _conv(specs, f"{pre}.proj", C, E, 1)
        if config.use_ss2d:
            _ss2d(specs, f"{pre}.ss2", C, N)
        else:
            _resblock(specs, f"{pre}.ss2", C)
        specs += [ParamSpec(f"{pre}.ln2.gamma", (C,), "ones"), ParamSpec(f"{pre}.ln2.beta", (C,), "zeros")]
        _conv(specs, f"{pre}.mlp1", config.mlp_ratio * C, C, 1)
        _conv(specs, f"{pre}.mlp2", C, config.mlp_ratio * C, 1)

    if config.use_lga:
        _conv(specs, "lga.kv1", 2 * C, C, 1)
        _conv(specs, "lga.kv2", 2 * C, 1, 3)
        _conv(specs, "lga.q1", C, g, 3)
        _conv(specs, "lga.q2", C, C, 1)
        _conv(specs, "lga.q3", C, 1, 3)
        specs.append(ParamSpec("lga.tau", (config.heads,), f"const:{config.tau_init}"))
        _conv(specs, "lga.out", C, C, 1)

    _conv(specs, "head", 3, C, 3, weight_init="zeros")

    for lvl in range(config.pyramid_levels):
        _conv(specs, f"ide{lvl}.conv1", h, 6, 3)
        _conv(specs, f"ide{lvl}.conv2", 3, h, 3, bias_init="ones", weight_init="zeros")
    return specs


def init_params(config: ModelConfig, seed: int = 0, dtype=np.float32) -> ParamStore:
    """Deterministic initialisation.

    Convolution and linear weights are uniform in +-1/sqrt(fan_in); biases are
    zero. Output head, pyramid refinement tails and mask-head weights start at
    zero (mask bias at one) so the untrained model is the identity map.
    """
    rng = np.random.default_rng(seed)
    store = ParamStore(config=config)
    for spec in param_specs(config):
        if spec.init == "fan_in":
            bound = 1.0 / np.sqrt(spec.fan_in)
            arr = rng.uniform(-bound, bound, spec.shape)
        elif spec.init == "zeros":
            arr = np.zeros(spec.shape)
        elif spec.init == "ones":
            arr = np.ones(spec.shape)
        elif spec.init.startswith("const:"):
            arr = np.full(spec.shape, float(spec.init.split(":", 1)[1]))
        elif spec.init == "a_log":
            # A = -exp(A_log) = -(1..N) for every channel
            arr = np.broadcast_to(np.log(np.arange(1, spec.shape[-1] + 1)), spec.shape).copy()
        elif spec.init == "dt_bias":
            dt = np.exp(rng.uniform(np.log(0.01), np.log(0.1), spec.shape))
            arr = dt + np.log(-np.expm1(-dt))          # inverse softplus
        else:
            raise ValueError(f"unknown init {spec.init!r} for {spec.name}")
        store[spec.name] = Tensor(arr.astype(dtype))
    return store


def check_params(store: ParamStore, config: ModelConfig) -> None:
    """Raise on the first parameter the config needs that is absent or misshapen."""
    for spec in param_specs(config):
        if spec.name not in store:
            raise MissingParameterError(spec.name)
        if store[spec.name].shape != spec.shape:
            raise ValueError(f"parameter {spec.name!r} has shape {store[spec.name].shape}, expected {spec.shape}")
