"""Losses, metrics, Adam and the training loop."""

from .losses import LossWeights, loss_components, loss_total
from .loop import EvalResult, TrainingDiverged, TrainResult, evaluate, train, training_loss, write_curve
from .metrics import delta_e, psnr, srgb_to_lab, ssim, ssim_tensor
from .optim import TrainConfig, adam_step

__all__ = [
    "EvalResult", "LossWeights", "TrainConfig", "TrainResult", "TrainingDiverged", "adam_step",
    "delta_e", "evaluate", "loss_components", "loss_total", "psnr", "srgb_to_lab", "ssim",
    "ssim_tensor", "train", "training_loss", "write_curve",
]
