"""Tensor arithmetic, transform kernels and reverse-mode differentiation."""

from . import functional, transforms
from .functional import (
    conv2d,
    down2x,
    fft2,
    haar_dwt,
    haar_idwt,
    hadamard,
    ifft2_real,
    layer_norm,
    linear2d,
    pad2d,
    resample2x,
    selective_scan,
    sigmoid,
    silu,
    softmax,
    softplus,
    up2x,
)
from .gradcheck import grad_check
from .tensor import (
    Tensor,
    as_tensor,
    concat,
    debug_finite,
    exp,
    grad,
    grad_enabled,
    log,
    matmul,
    no_grad,
    set_debug,
    split,
    sqrt,
    stack,
    tabs,
)
from .transforms import ComplexPlane, dwt2_haar, idwt2_haar, pad_to_pow2

__all__ = [
    "ComplexPlane", "Tensor", "as_tensor", "concat", "conv2d", "debug_finite", "down2x",
    "dwt2_haar", "exp", "fft2", "functional", "grad", "grad_enabled", "grad_check", "haar_dwt", "haar_idwt",
    "hadamard", "idwt2_haar", "ifft2_real", "layer_norm", "linear2d", "log", "matmul",
    "no_grad", "pad2d", "pad_to_pow2", "resample2x", "selective_scan", "set_debug",
    "sigmoid", "silu", "softmax", "softplus", "split", "sqrt", "stack", "tabs",
    "transforms", "up2x",
]
