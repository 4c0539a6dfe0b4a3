"""Central-difference gradient checking."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor


def grad_check(fn: Callable[..., Tensor], inputs: Sequence[Tensor], h: float = 1e-5,
               max_coords: int = 64, seed: int = 0, analytic_scale: float = 1.0) -> float:
    """Compare reverse-mode gradients of ``fn(*inputs)`` against central differences.

    Non-scalar outputs are reduced with a fixed random projection so every
    output element contributes. For inputs larger than ``max_coords`` a random
    subset of ``max_coords`` coordinates is checked. Returns the max over checked
    coordinates of ``|analytic - numeric| / max(1e-8, |numeric|)``.

    The numeric derivative differences the two perturbed outputs elementwise
    before projecting, which avoids cancellation in a large projected sum.

    ``analytic_scale`` multiplies the analytic gradient and only exists to
    test the checker's own sensitivity.
    """
    rng = np.random.default_rng(seed)
    inputs = list(inputs)
    for t in inputs:
        if t.dtype != np.float64:
            raise TypeError("grad_check requires float64 inputs")
        t.requires_grad = True

    probe = fn(*inputs)
    weights = rng.standard_normal(probe.shape) if probe.size > 1 else np.ones(probe.shape)

    def objective() -> Tensor:
        out = fn(*inputs)
        return (out * weights).sum()

    for t in inputs:
        t.grad = None
    objective().backward()
    analytic = [(t.grad if t.grad is not None else np.zeros_like(t.data)) * analytic_scale for t in inputs]

    worst = 0.0
    for t, ga in zip(inputs, analytic):
        flat = t.data.reshape(-1)
        n = flat.size
        coords = np.arange(n) if n <= max_coords else rng.choice(n, size=max_coords, replace=False)
        for i in coords:
            orig = flat[i]
            flat[i] = orig + h
            fp = fn(*inputs).data
            flat[i] = orig - h
            fm = fn(*inputs).data
            flat[i] = orig
            numeric = float(((fp - fm) * weights).sum()) / (2 * h)
            err = abs(ga.reshape(-1)[i] - numeric) / max(1e-8, abs(numeric))
            worst = max(worst, err)
    return worst
