from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from ..numerics import Tensor, tabs
from .metrics import ssim_tensor


@dataclass(frozen=True)
class LossWeights:
    """Weights of the reconstruction (L1), SSIM, high-frequency and perceptual terms."""

    alpha: float = 1.0
    beta: float = 0.5
    gamma_w: float = 0.5
    eta_w: float = 0.0

    def __post_init__(self):
        for k in ("alpha", "beta", "gamma_w", "eta_w"):
            if getattr(self, k) < 0:
                raise ValueError(f"loss weight {k} must be >= 0, got {getattr(self, k)}")


def l1(a: Tensor, b: Tensor) -> Tensor:
    return tabs(a - b).mean()


def loss_components(pred: Tensor, target: Tensor, pred_hf: Sequence[Tensor], target_hf: Sequence[Tensor],
                    perceptual: Callable[[Tensor, Tensor], Tensor] | None = None,
                    with_perceptual: bool = False) -> dict[str, Tensor]:
    if pred.shape != target.shape:
        raise ValueError(f"pred/target shape mismatch: {pred.shape} vs {target.shape}")
    if len(pred_hf) != len(target_hf):
        raise ValueError(f"high-frequency level count mismatch: {len(pred_hf)} vs {len(target_hf)}")
    terms = {"re": l1(pred, target), "ssim": 1.0 - ssim_tensor(pred, target)}
    hf = None
    for lvl, (ph, th) in enumerate(zip(pred_hf, target_hf)):
        if ph.shape != th.shape:
            raise ValueError(f"high-frequency level {lvl} shape mismatch: {ph.shape} vs {th.shape}")
        term = l1(ph, th)
        hf = term if hf is None else hf + term
    terms["hf"] = hf if hf is not None else Tensor(0.0)
    if with_perceptual:
        if perceptual is None:
            raise ValueError("eta_w > 0 needs a perceptual feature function")
        terms["p"] = perceptual(pred, target)
    return terms


def loss_total(pred: Tensor, target: Tensor, pred_hf, target_hf, weights: LossWeights = LossWeights(),
               perceptual=None) -> Tensor:
    """alpha*L1 + beta*(1 - SSIM) + gamma*sum_l L1(HF_l) + eta*L_P (skipped when eta is 0)."""
    t = loss_components(pred, target, pred_hf, target_hf, perceptual, with_perceptual=weights.eta_w > 0)
    total = t["re"] * weights.alpha + t["ssim"] * weights.beta + t["hf"] * weights.gamma_w
    if "p" in t:
        total = total + t["p"] * weights.eta_w
    return total
