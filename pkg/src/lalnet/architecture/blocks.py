"""Building blocks of the network.

Every block is a plain function of its inputs, a :class:`ParamStore` and a
name prefix. Inputs and outputs are [B, C, H, W] tensors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numerics import functional as F
from ..numerics.tensor import Tensor, concat, exp, reshape, split, transpose, flip
from .params import ParamStore


def conv(x: Tensor, p: ParamStore, name: str, groups: int = 1) -> Tensor:
    return F.conv2d(x, p[f"{name}.weight"], p[f"{name}.bias"], groups=groups, padding="reflect")


def resblock(x: Tensor, p: ParamStore, name: str) -> Tensor:
    return x + conv(F.silu(conv(x, p, f"{name}.conv1")), p, f"{name}.conv2")


# -- colour-separated branch --------------------------------------------------------

def cab_forward(x: Tensor, p: ParamStore, prefix: str = "ddcm.cab") -> Tensor:
    """Squeeze-excitation channel attention: pooled gate rescales each channel."""
    pooled = x.mean(axis=(2, 3), keepdims=True)
    hidden = F.silu(conv(pooled, p, f"{prefix}.squeeze"))
    gate = F.sigmoid(conv(hidden, p, f"{prefix}.excite"))
    return x * gate


def ddcm_pre_cab(x: Tensor, p: ParamStore, prefix: str = "ddcm") -> Tensor:
    """Per-colour FFT -> separate convs on real/imag planes -> inverse FFT (real part).

    Output is [B, 3g, h, w] with channels ordered colour-major, and no path
    between colour groups.
    """
    bsz, c, h, w = x.shape
    if c != 3:
        raise ValueError(f"DDCM expects 3 colour channels, got {c}")
    weight = p[f"{prefix}.freq.weight"]
    g = weight.shape[0] // 6
    spec = reshape(F.fft2(x), (bsz, 6, h, w))                    # R1,I1,R2,I2,R3,I3
    spec = F.conv2d(spec, weight, None, groups=6)
    spec = transpose(reshape(spec, (bsz, 3, 2, g, h, w)), (0, 1, 3, 2, 4, 5))
    return reshape(F.ifft2_real(spec), (bsz, 3 * g, h, w))


def ddcm_forward(x: Tensor, p: ParamStore, prefix: str = "ddcm") -> Tensor:
    return cab_forward(ddcm_pre_cab(x, p, prefix), p, f"{prefix}.cab")


def ddcm_alt_forward(x: Tensor, p: ParamStore) -> Tensor:
    """Grouped-convolution stand-in used when DDCM is ablated."""
    return conv(F.silu(conv(x, p, "ddcm_alt.conv1", groups=3)), p, "ddcm_alt.conv2", groups=3)


# -- colour-mixed branch ----------------------------------------------------------

def mcm_forward(x: Tensor, p: ParamStore, prefix: str = "mcm") -> Tensor:
    """conv3x3 -> Haar DWT -> concat bands -> conv3x3 -> bilinear 2x back to input size."""
    h, w = x.shape[-2:]
    if h % 2 or w % 2:
        raise ValueError(f"MCM needs even extents, got {h}x{w}")
    small = conv(x, p, f"{prefix}.conv_in")
    bands = F.haar_dwt(small)
    return F.up2x(conv(bands, p, f"{prefix}.conv_out"))


def mcm_alt_forward(x: Tensor, p: ParamStore) -> Tensor:
    return conv(F.silu(conv(x, p, "mcm_alt.conv1")), p, "mcm_alt.conv2")


# -- SS2D -----------------------------------------------------------------------------

def _to_sequence(x: Tensor, direction: int) -> Tensor:
    bsz, d, h, w = x.shape
    if direction in (0, 1):
        seq = reshape(x, (bsz, d, h * w))
    else:
        seq = reshape(transpose(x, (0, 1, 3, 2)), (bsz, d, h * w))
    return flip(seq, -1) if direction in (1, 3) else seq


def _from_sequence(seq: Tensor, direction: int, shape: tuple) -> Tensor:
    bsz, d, h, w = shape
    if direction in (1, 3):
        seq = flip(seq, -1)
    if direction in (0, 1):
        return reshape(seq, shape)
    return transpose(reshape(seq, (bsz, d, w, h)), (0, 1, 3, 2))


def ss2d_directions(x: Tensor, p: ParamStore, prefix: str) -> list[Tensor]:
    """Selective-scan outputs for the four scan orders, each in [B,d,H,W] layout.

    Orders: row-major forward, row-major backward, column-major forward,
    column-major backward.
    """
    outs = []
    for k in range(4):
        seq = _to_sequence(x, k)
        delta = F.softplus(p[f"{prefix}.dt_weight"][k] @ seq + reshape(p[f"{prefix}.dt_bias"][k], (-1, 1)))
        Bm = p[f"{prefix}.B_weight"][k] @ seq
        Cm = p[f"{prefix}.C_weight"][k] @ seq
        A = -exp(p[f"{prefix}.A_log"][k])
        y = F.selective_scan(seq, delta, A, Bm, Cm, p[f"{prefix}.D"][k])
        outs.append(_from_sequence(y, k, x.shape))
    return outs


def ss2d_forward(x: Tensor, p: ParamStore, prefix: str) -> Tensor:
    d0, d1, d2, d3 = ss2d_directions(x, p, prefix)
    return d0 + d1 + d2 + d3


# -- LSSM ----------------------------------------------------------------------------

def lssm_forward(f_cm: Tensor, f_cs: Tensor, p: ParamStore, prefix: str = "lssm0",
                 use_ss2d: bool = True, residual: bool = True) -> Tensor:
    """Three-stream state-space block fusing colour-mixed and colour-separated features."""
    if f_cm.shape != f_cs.shape:
        raise ValueError(f"LSSM inputs differ in shape: {f_cm.shape} vs {f_cs.shape}")
    scan = ss2d_forward if use_ss2d else resblock
    f1, f2 = split(conv(f_cm + f_cs, p, f"{prefix}.in_proj"), 2, axis=1)

    s1 = F.silu(conv(conv(f1, p, f"{prefix}.expand"), p, f"{prefix}.dw", groups=p[f"{prefix}.dw.weight"].shape[0]))
    s1 = F.layer_norm(scan(s1, p, f"{prefix}.ss1"), p[f"{prefix}.ln1.gamma"], p[f"{prefix}.ln1.beta"])
    s1 = conv(s1, p, f"{prefix}.proj")
    s2 = scan(f_cs, p, f"{prefix}.ss2")

    fused = F.layer_norm((s1 + s2) * F.silu(f2), p[f"{prefix}.ln2.gamma"], p[f"{prefix}.ln2.beta"])
    out = conv(F.silu(conv(fused, p, f"{prefix}.mlp1")), p, f"{prefix}.mlp2")
    return f_cm + out if residual else out


def lssm_alt_forward(f_cm: Tensor, f_cs: Tensor, p: ParamStore, prefix: str = "lssm0") -> Tensor:
    s = f_cm + f_cs
    return f_cm + conv(F.silu(conv(s, p, f"{prefix}.res.conv1")), p, f"{prefix}.res.conv2")


# -- LGA -----------------------------------------------------------------------------

def lga_forward(f_cm: Tensor, f_cs: Tensor, p: ParamStore, heads: int, prefix: str = "lga",
                return_attention: bool = False):
    """Channel-wise (transposed) attention with queries from colour-separated features."""
    bsz, c, h, w = f_cm.shape
    if f_cs.shape != f_cm.shape:
        raise ValueError(f"LGA inputs differ in shape: {f_cm.shape} vs {f_cs.shape}")
    if c % heads:
        raise ValueError(f"channels C={c} not divisible by heads={heads}")
    kv = conv(conv(f_cm, p, f"{prefix}.kv1"), p, f"{prefix}.kv2", groups=2 * c)
    k, v = split(kv, 2, axis=1)
    q = conv(f_cs, p, f"{prefix}.q1", groups=3)
    q = conv(conv(q, p, f"{prefix}.q2"), p, f"{prefix}.q3", groups=c)

    shape = (bsz, heads, c // heads, h * w)
    q, k, v = reshape(q, shape), reshape(k, shape), reshape(v, shape)
    tau = reshape(p[f"{prefix}.tau"], (1, heads, 1, 1))
    logits = (q @ transpose(k, (0, 1, 3, 2))) * (1.0 / np.sqrt(h * w)) * tau
    attn = F.softmax(logits, axis=-1)
    mixed = reshape(attn @ v, (bsz, c, h, w))
    out = f_cm + conv(mixed, p, f"{prefix}.out")
    if return_attention:
        return out, attn
    return out


# -- pyramid + detail enhancement ---------------------------------------------------

@dataclass
class PyramidDecomposition:
    """High-frequency levels at H..H/2^(L-1) plus the low-frequency image at H/2^L."""

    hf: list
    lf: Tensor
    masks: list = field(default_factory=list)

    @property
    def levels(self) -> int:
        return len(self.hf)


def ldp_decompose(x: Tensor, p: ParamStore | None, levels: int, prefix: str = "ldp") -> PyramidDecomposition:
    """Laplacian differences plus (optional) learned residual refinement per level.

    With ``p=None`` the plain Laplacian pyramid is returned.
    """
    h, w = x.shape[-2:]
    m = 2**levels
    if h % m or w % m:
        raise ValueError(f"input {h}x{w} not divisible by 2^levels={m}")
    hf = []
    cur = x
    for lvl in range(levels):
        low = F.down2x(cur)
        base = cur - F.up2x(low)
        if p is not None:
            name = f"{prefix}{lvl}"
            base = base + conv(F.silu(conv(base, p, f"{name}.conv1")), p, f"{name}.conv2")
        hf.append(base)
        cur = low
    return PyramidDecomposition(hf=hf, lf=cur)


def ide_refine(y_lf: Tensor, pyramid: PyramidDecomposition, p: ParamStore, prefix: str = "ide") -> Tensor:
    """Coarse-to-fine: M = Res(Concat(Up(Y), HF)); Y <- Up(Y) + HF * M."""
    if y_lf.shape != pyramid.lf.shape:
        raise ValueError(f"low-frequency shape {y_lf.shape} does not match pyramid {pyramid.lf.shape}")
    y = y_lf
    pyramid.masks = [None] * pyramid.levels
    for lvl in reversed(range(pyramid.levels)):
        up = F.up2x(y)
        hf = pyramid.hf[lvl]
        if up.shape != hf.shape:
            raise ValueError(f"level {lvl}: upsampled {up.shape} vs high-frequency {hf.shape}")
        name = f"{prefix}{lvl}"
        mask = conv(F.silu(conv(concat([up, hf], axis=1), p, f"{name}.conv1")), p, f"{name}.conv2")
        pyramid.masks[lvl] = mask
        y = up + hf * mask
    return y
