"""Differentiable operators built on :class:`~lalnet.numerics.tensor.Tensor`.

Heavier kernels (convolution, normalisation, softmax, transforms and the
selective scan) are fused: each computes its forward pass in numpy and supplies
a hand-written adjoint.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import transforms as tf
from .tensor import Tensor, as_tensor, make

PADDING_MODES = ("reflect", "zero", "valid")


# -- pointwise ------------------------------------------------------------------

def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(x: Tensor) -> Tensor:
    s = _sigmoid(x.data)
    return make(s, (x,), lambda g: (g * s * (1.0 - s),))


def silu(x: Tensor) -> Tensor:
    xd = x.data
    s = _sigmoid(xd)
    return make(xd * s, (x,), lambda g: (g * (s + xd * s * (1.0 - s)),))


def softplus(x: Tensor) -> Tensor:
    xd = x.data
    out = np.maximum(xd, 0) + np.log1p(np.exp(-np.abs(xd)))
    return make(out, (x,), lambda g: (g * _sigmoid(xd),))


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ValueError(f"hadamard operands differ in shape: {a.shape} vs {b.shape}")
    return a * b


def _check_axis(axis: int, ndim: int) -> int:
    if not -ndim <= axis < ndim:
        raise ValueError(f"axis {axis} out of range for a {ndim}-d tensor")
    return axis % ndim


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    axis = _check_axis(axis, x.ndim)
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)
    return make(y, (x,), lambda g: (y * (g - (g * y).sum(axis=axis, keepdims=True)),))


def layer_norm(x: Tensor, gamma: Tensor | None = None, beta: Tensor | None = None,
               axis: int = 1, eps: float = 1e-6) -> Tensor:
    """Normalize over one axis (the channel axis of [B,C,H,W] by default)."""
    axis = _check_axis(axis, x.ndim)
    xd = x.data
    mu = xd.mean(axis=axis, keepdims=True)
    xc = xd - mu
    var = (xc * xc).mean(axis=axis, keepdims=True)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = xc * rstd
    bshape = [1] * x.ndim
    bshape[axis] = x.shape[axis]
    other = tuple(i for i in range(x.ndim) if i != axis)
    gd = gamma.data.reshape(bshape) if gamma is not None else None
    y = xhat * gd if gd is not None else xhat.copy()
    if beta is not None:
        y = y + beta.data.reshape(bshape)

    def backward(g):
        gx_hat = g * gd if gd is not None else g
        gx = rstd * (gx_hat - gx_hat.mean(axis=axis, keepdims=True)
                     - xhat * (gx_hat * xhat).mean(axis=axis, keepdims=True))
        ggamma = (g * xhat).sum(axis=other) if gamma is not None else None
        gbeta = g.sum(axis=other) if beta is not None else None
        return gx, ggamma, gbeta

    parents = (x, gamma if gamma is not None else Tensor(0.0), beta if beta is not None else Tensor(0.0))
    return make(y, parents, backward)


# -- separable spatial operators --------------------------------------------------

def linear2d(x: Tensor, mh: np.ndarray, mw: np.ndarray) -> Tensor:
    """Apply fixed matrices to the last two axes: ``mh @ x @ mw.T``."""
    mh = mh.astype(x.dtype, copy=False)
    mw = mw.astype(x.dtype, copy=False)
    return make(mh @ x.data @ mw.T, (x,), lambda g: (mh.T @ g @ mw,))


def pad2d(x: Tensor, pad: int, mode: str = "reflect") -> Tensor:
    if pad == 0:
        return x
    h, w = x.shape[-2:]
    return linear2d(x, tf.pad_matrix(h, pad, pad, mode), tf.pad_matrix(w, pad, pad, mode))


def resample2x(x: Tensor, direction: str) -> Tensor:
    """2x average-pool (``down``) or bilinear half-pixel upsample (``up``)."""
    h, w = x.shape[-2:]
    if direction == "down":
        if h % 2 or w % 2:
            raise ValueError(f"downsampling needs even extents, got {h}x{w}")
        return linear2d(x, tf.downsample_matrix(h), tf.downsample_matrix(w))
    if direction == "up":
        return linear2d(x, tf.upsample_matrix(h), tf.upsample_matrix(w))
    raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")


def down2x(x: Tensor) -> Tensor:
    return resample2x(x, "down")


def up2x(x: Tensor) -> Tensor:
    return resample2x(x, "up")


# -- convolution ------------------------------------------------------------------

def conv2d(x: Tensor, weight: Tensor, bias: Tensor | None = None, groups: int = 1,
           stride: int = 1, padding: str = "reflect") -> Tensor:
    """Grouped 2D cross-correlation on [B,Cin,H,W] with an odd square kernel.

    ``padding`` is ``reflect`` or ``zero`` (same-size output at stride 1) or
    ``valid``.
    """
    if x.ndim != 4:
        raise ValueError(f"conv2d input must be 4-d [B,C,H,W], got shape {x.shape}")
    if weight.ndim != 4:
        raise ValueError(f"conv2d weight must be 4-d [Cout,Cin/groups,k,k], got shape {weight.shape}")
    cout, cin_g, kh, kw = weight.shape
    cin = x.shape[1]
    if groups < 1 or cin % groups:
        raise ValueError(f"input channels Cin={cin} not divisible by groups={groups}")
    if cout % groups:
        raise ValueError(f"output channels Cout={cout} not divisible by groups={groups}")
    if cin_g * groups != cin:
        raise ValueError(f"weight dim 1 (Cin/groups) is {cin_g}, expected {cin // groups} for Cin={cin}")
    if kh != kw or kh % 2 == 0:
        raise ValueError(f"kernel must be odd and square, got {kh}x{kw}")
    if bias is not None and bias.shape != (cout,):
        raise ValueError(f"bias must have shape ({cout},), got {bias.shape}")
    if stride not in (1, 2):
        raise ValueError(f"stride must be 1 or 2, got {stride}")
    if padding not in PADDING_MODES:
        raise ValueError(f"padding must be one of {PADDING_MODES}, got {padding!r}")
    if padding != "valid":
        x = pad2d(x, kh // 2, padding)
    return _conv2d_valid(x, weight, bias, groups, stride)


def _conv2d_valid(x: Tensor, weight: Tensor, bias: Tensor | None, groups: int, stride: int) -> Tensor:
    xd, wd = x.data, weight.data
    bsz, cin, h, w = xd.shape
    cout, cin_g, k, _ = wd.shape
    G, cout_g = groups, cout // groups
    ho = (h - k) // stride + 1
    wo = (w - k) // stride + 1
    if ho < 1 or wo < 1:
        raise ValueError(f"input {h}x{w} too small for kernel {k}")
    kk = cin_g * k * k

    win = sliding_window_view(xd, (k, k), axis=(2, 3))[:, :, ::stride, ::stride]
    cols = (win.reshape(bsz, G, cin_g, ho, wo, k, k)
               .transpose(1, 0, 3, 4, 2, 5, 6)
               .reshape(G, bsz * ho * wo, kk))
    wm = wd.reshape(G, cout_g, kk).transpose(0, 2, 1)
    out = (cols @ wm).reshape(G, bsz, ho, wo, cout_g).transpose(1, 0, 4, 2, 3).reshape(bsz, cout, ho, wo)
    if bias is not None:
        out = out + bias.data[None, :, None, None]

    def backward(g):
        go = g.reshape(bsz, G, cout_g, ho, wo).transpose(1, 0, 3, 4, 2).reshape(G, bsz * ho * wo, cout_g)
        gw = (cols.transpose(0, 2, 1) @ go).transpose(0, 2, 1).reshape(wd.shape)
        gx = None
        if x.requires_grad:
            gcols = (go @ wm.transpose(0, 2, 1)).reshape(G, bsz, ho, wo, cin_g, k, k)
            gcols = gcols.transpose(1, 0, 4, 2, 3, 5, 6).reshape(bsz, cin, ho, wo, k, k)
            gx = np.zeros_like(xd)
            for i in range(k):
                for j in range(k):
                    gx[:, :, i:i + stride * (ho - 1) + 1:stride, j:j + stride * (wo - 1) + 1:stride] += gcols[..., i, j]
        gb = g.sum(axis=(0, 2, 3)) if bias is not None else None
        return gx, gw, gb

    parents = (x, weight, bias if bias is not None else Tensor(0.0))
    return make(out, parents, backward)


# -- transforms -------------------------------------------------------------------

def fft2(x: Tensor) -> Tensor:
    """Real [..., H, W] -> stacked real/imag parts [..., 2, H, W] (unnormalized DFT)."""
    plane = tf.fft2(x.data)
    out = np.stack([plane.real, plane.imag], axis=-3)

    def backward(g):
        z = tf._fft2_complex(g[..., 0, :, :] - 1j * g[..., 1, :, :])
        return (z.real.astype(x.dtype),)

    return make(out, (x,), backward)


def ifft2_real(z: Tensor) -> Tensor:
    """Stacked real/imag [..., 2, H, W] -> real part of the inverse DFT [..., H, W]."""
    if z.shape[-3] != 2:
        raise ValueError(f"expected a real/imag axis of size 2 at position -3, got shape {z.shape}")
    plane = tf.ifft2(tf.ComplexPlane(z.data[..., 0, :, :], z.data[..., 1, :, :]))

    def backward(g):
        h, w = g.shape[-2:]
        c = tf._fft2_complex(g.astype(np.complex128), inverse=True) / (h * w)
        return (np.stack([c.real, -c.imag], axis=-3).astype(z.dtype),)

    return make(plane.real, (z,), backward)


def haar_dwt(x: Tensor) -> Tensor:
    """[B,C,H,W] -> [B,4C,H/2,W/2] laid out as concat(cA, cH, cV, cD)."""
    bsz, c, h, w = x.shape
    bands = tf.dwt2_haar(x.data)
    out = np.concatenate(bands, axis=1)

    def backward(g):
        return (tf.idwt2_haar(*np.split(g, 4, axis=1)),)

    return make(out, (x,), backward)


def haar_idwt(z: Tensor) -> Tensor:
    """Inverse of :func:`haar_dwt`."""
    if z.shape[1] % 4:
        raise ValueError(f"channel count {z.shape[1]} is not a multiple of 4")
    out = tf.idwt2_haar(*np.split(z.data, 4, axis=1))

    def backward(g):
        return (np.concatenate(tf.dwt2_haar(g), axis=1),)

    return make(out, (z,), backward)


# -- selective scan ---------------------------------------------------------------

def selective_scan(u: Tensor, delta: Tensor, A: Tensor, Bm: Tensor, Cm: Tensor, D: Tensor) -> Tensor:
    """Input-dependent linear recurrence over a sequence.

    Shapes: ``u, delta`` [B,d,L]; ``A`` [d,N]; ``Bm, Cm`` [B,N,L]; ``D`` [d].

    ``h_t = exp(delta_t * A) * h_{t-1} + delta_t * B_t * u_t`` and
    ``y_t = C_t . h_t + D * u_t``, with ``h_{-1} = 0``.
    """
    ud, dd, Ad, Bd, Cd, Dd = u.data, delta.data, A.data, Bm.data, Cm.data, D.data
    bsz, d, L = ud.shape
    dA = np.exp(dd[:, :, None, :] * Ad[None, :, :, None])           # [B,d,N,L]
    dBu = (dd * ud)[:, :, None, :] * Bd[:, None, :, :]               # [B,d,N,L]
    hs = np.empty_like(dA)
    h = np.zeros(dA.shape[:-1], dtype=dA.dtype)
    for t in range(L):
        h = dA[..., t] * h + dBu[..., t]
        hs[..., t] = h
    y = np.einsum("bdnl,bnl->bdl", hs, Cd) + Dd[None, :, None] * ud

    def backward(gy):
        gD = (gy * ud).sum(axis=(0, 2))
        gC = np.einsum("bdnl,bdl->bnl", hs, gy)
        direct = gy[:, :, None, :] * Cd[:, None, :, :]
        G = np.empty_like(hs)
        carry = np.zeros(hs.shape[:-1], dtype=hs.dtype)
        for t in range(L - 1, -1, -1):
            carry = direct[..., t] + carry
            G[..., t] = carry
            carry = carry * dA[..., t]
        h_prev = np.concatenate([np.zeros_like(hs[..., :1]), hs[..., :-1]], axis=-1)
        gpre = G * h_prev * dA                                       # d/d(delta*A)
        GB = np.einsum("bdnl,bnl->bdl", G, Bd)
        gdelta = np.einsum("bdnl,dn->bdl", gpre, Ad) + GB * ud
        gA = np.einsum("bdnl,bdl->dn", gpre, dd)
        gB = np.einsum("bdnl,bdl->bnl", G, dd * ud)
        gu = gy * Dd[None, :, None] + GB * dd
        return gu, gdelta, gA, gB, gC, gD

    return make(y, (u, delta, A, Bm, Cm, D), backward)


def scalar(value, like: Tensor) -> Tensor:
    return as_tensor(np.asarray(value, dtype=like.dtype))
