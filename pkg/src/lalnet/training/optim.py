from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..architecture.params import ParamStore


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    iters: int = 2000
    batch: int = 4
    patch_size: int = 32
    seed: int = 0
    eval_every: int = 250
    cosine: bool = False

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.iters < 1:
            raise ValueError(f"iters must be >= 1, got {self.iters}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")
        if self.eval_every < 1:
            raise ValueError(f"eval_every must be >= 1, got {self.eval_every}")

    def lr_at(self, step: int) -> float:
        """Learning rate for 1-based ``step``; constant unless cosine decay is on."""
        if not self.cosine:
            return self.lr
        return 0.5 * self.lr * (1.0 + math.cos(math.pi * min(step - 1, self.iters) / self.iters))


def adam_step(store: ParamStore, grads: dict, config: TrainConfig) -> ParamStore:
    """One bias-corrected Adam update of every parameter in ``store`` (in place)."""
    missing = [name for name in store if name not in grads]
    if missing:
        raise KeyError(f"missing gradient for parameter {missing[0]!r}")
    store.step += 1
    t = store.step
    lr = config.lr_at(t)
    b1, b2 = config.beta1, config.beta2
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for name, param in store.items():
        g = np.asarray(grads[name], dtype=param.dtype)
        if g.shape != param.shape:
            raise ValueError(f"gradient for {name!r} has shape {g.shape}, expected {param.shape}")
        m = store.m.get(name)
        v = store.v.get(name)
        m = (1 - b1) * g if m is None else b1 * m + (1 - b1) * g
        v = (1 - b2) * g * g if v is None else b2 * v + (1 - b2) * g * g
        store.m[name] = m.astype(param.dtype, copy=False)
        store.v[name] = v.astype(param.dtype, copy=False)
        m_hat = m / c1
        v_hat = v / c2
        param.data = (param.data - lr * m_hat / (np.sqrt(v_hat) + config.eps)).astype(param.dtype, copy=False)
    return store
