"""Training and evaluation loops."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..architecture import ModelConfig, ParamStore, init_params, lalnet_forward, save_checkpoint
from ..architecture.blocks import ldp_decompose
from ..architecture.model import enhance
from ..data import PairedCorpus
from ..numerics import Tensor, grad_enabled, no_grad
from .losses import LossWeights, loss_total
from .metrics import delta_e, psnr, ssim
from .optim import TrainConfig, adam_step

log = logging.getLogger(__name__)

CURVE_COLUMNS = ("iter", "loss", "psnr", "ssim", "delta_e")


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class EvalResult:
    psnr: float
    ssim: float
    delta_e: float
    psnr_in: float
    ssim_in: float
    per_image: list = field(default_factory=list)


@dataclass
class TrainResult:
    store: ParamStore
    curve: list
    final: EvalResult | None
    checkpoint_path: Path | None = None
    curve_path: Path | None = None


def evaluate(store: ParamStore, config: ModelConfig, corpus: PairedCorpus, batch: int = 8) -> EvalResult:
    """Mean PSNR / SSIM / Delta-E of clipped predictions against clean targets, per image."""
    rows = []
    for start in range(0, len(corpus), batch):
        deg = corpus.degraded[start:start + batch]
        pred = np.clip(enhance(deg, store, config), 0.0, 1.0)
        for d, p, c in zip(deg, pred, corpus.clean[start:start + batch]):
            rows.append(dict(psnr_in=psnr(d, c), ssim_in=ssim(d, c), psnr=psnr(p, c), ssim=ssim(p, c),
                             delta_e=delta_e(p, c)))
    mean = {k: float(np.mean([r[k] for r in rows])) for k in rows[0]}
    return EvalResult(per_image=rows, **mean)


def training_loss(store: ParamStore, config: ModelConfig, degraded: np.ndarray, clean: np.ndarray,
                  weights: LossWeights) -> Tensor:
    x = Tensor(degraded.astype(store.dtype))
    target = Tensor(clean.astype(store.dtype))
    pred = lalnet_forward(x, store, config)
    levels = config.pyramid_levels
    # High-frequency targets use the fixed Laplacian pyramid so the loss cannot be gamed by the learned refinement.
    pred_hf = ldp_decompose(pred, None, levels).hf
    with no_grad():
        target_hf = ldp_decompose(target, None, levels).hf
    return loss_total(pred, target, pred_hf, target_hf, weights)


def _crop_batch(corpus: PairedCorpus, idx: np.ndarray, size: int, rng: np.random.Generator):
    h, w = corpus.clean.shape[-2:]
    if size > h or size > w:
        raise ValueError(f"patch size {size} larger than images {h}x{w}")
    deg, cln = [], []
    for i in idx:
        y = int(rng.integers(0, h - size + 1))
        x = int(rng.integers(0, w - size + 1))
        deg.append(corpus.degraded[i, :, y:y + size, x:x + size])
        cln.append(corpus.clean[i, :, y:y + size, x:x + size])
    return np.stack(deg), np.stack(cln)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_curve(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for r in rows:
            w.writerow([r["iter"]] + [_fmt(r[k]) for k in CURVE_COLUMNS[1:]])


def train(model_config: ModelConfig, train_config: TrainConfig, corpus: PairedCorpus,
          heldout: PairedCorpus | None = None, out_dir=None, weights: LossWeights = LossWeights(),
          store: ParamStore | None = None, dtype=np.float32) -> TrainResult:
    """Adam training on random crops of ``corpus``; evaluates on ``heldout`` every ``eval_every`` iterations.

    Writes ``model.lalnet`` and ``curve.csv`` into ``out_dir`` when given.
    """
    if len(corpus) == 0:
        raise ValueError("training corpus is empty")
    if not grad_enabled():
        raise RuntimeError("train() called inside no_grad()")
    heldout = heldout if heldout is not None else corpus
    rng = np.random.default_rng(train_config.seed)
    if store is None:
        store = init_params(model_config, seed=train_config.seed, dtype=dtype)
    store.config = model_config
    names = store.names()
    curve = []
    final = None
    n = len(corpus)
    for it in range(1, train_config.iters + 1):
        idx = rng.choice(n, size=min(train_config.batch, n), replace=False)
        deg, cln = _crop_batch(corpus, idx, train_config.patch_size, rng)
        store.zero_grad()
        loss = training_loss(store, model_config, deg, cln, weights)
        value = float(loss.data)
        if not np.isfinite(value):
            raise TrainingDiverged(f"loss diverged (non-finite) at iteration {it}")
        loss.backward()
        grads = {k: (store[k].grad if store[k].grad is not None else np.zeros_like(store[k].data)) for k in names}
        adam_step(store, grads, train_config)
        if it % train_config.eval_every == 0 or it == train_config.iters:
            final = evaluate(store, model_config, heldout)
            curve.append(dict(iter=it, loss=value, psnr=final.psnr, ssim=final.ssim, delta_e=final.delta_e))
            log.info("iter %d loss %.5f psnr %.3f ssim %.4f", it, value, final.psnr, final.ssim)
    store.zero_grad()

    ckpt_path = curve_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        ckpt_path = out_dir / "model.lalnet"
        curve_path = out_dir / "curve.csv"
        save_checkpoint(store, ckpt_path)
        write_curve(curve, curve_path)
    return TrainResult(store, curve, final, ckpt_path, curve_path)
