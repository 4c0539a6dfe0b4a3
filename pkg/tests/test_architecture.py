import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lalnet.architecture import (PRESETS, BadMagicError, ChecksumError, MissingParameterError, ModelConfig,
                                 ParamStore, TruncatedCheckpointError, UnsupportedVersionError, cab_forward,
                                 ddcm_forward, ddcm_pre_cab, enhance, expected_parameter_count, ide_refine,
                                 init_params, lalnet_forward, ldp_decompose, lga_forward, load_checkpoint,
                                 lssm_forward, mcm_forward, save_checkpoint, ss2d_directions, ss2d_forward,
                                 valid_size)
from lalnet.architecture import checkpoint as ckpt
from lalnet.architecture.blocks import conv
from lalnet.architecture.model import count_parameters
from lalnet.numerics import Tensor, no_grad

from oracles import (bilinear_up_scalar, channel_attention_dense, conv2d_loop, ddcm_chain, parameter_count,
                     ss2d_sequential)

SMALL = ModelConfig(base_channels=6, lssm_blocks=1, expansion_factor=2, state_dim=3, mlp_ratio=2,
                    detail_channels=4, heads=3, pyramid_levels=2)


def busy_store(config=SMALL, seed=0):
    """f64 store where every tensor is non-trivial (zero-init tails made random)."""
    rng = np.random.default_rng(seed + 100)
    store = init_params(config, seed=seed, dtype=np.float64)
    for name, t in store.items():
        if np.ptp(t.data) == 0.0:
            t.data = t.data + 0.2 * rng.standard_normal(t.shape)
    return store


def ss_store(d, n, rng, prefix="s"):
    p = ParamStore()
    p[f"{prefix}.dt_weight"] = rng.standard_normal((4, d, d)) / math.sqrt(d)
    p[f"{prefix}.dt_bias"] = rng.uniform(-2.0, 0.0, (4, d))
    p[f"{prefix}.B_weight"] = rng.standard_normal((4, n, d)) / math.sqrt(d)
    p[f"{prefix}.C_weight"] = rng.standard_normal((4, n, d)) / math.sqrt(d)
    p[f"{prefix}.A_log"] = np.log(rng.uniform(0.5, 4.0, (4, d, n)))
    p[f"{prefix}.D"] = rng.standard_normal((4, d))
    return p


def ss_args(p, prefix="s"):
    names = ("dt_weight", "dt_bias", "B_weight", "C_weight", "A_log", "D")
    return [p[f"{prefix}.{k}"].data for k in names]


def silu(v):
    return v / (1.0 + np.exp(-v))


def layer_norm_np(x, gamma, beta, eps=1e-6):
    mu = x.mean(axis=1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps) * gamma[None, :, None, None] + beta[None, :, None, None]


def conv_np(x, p, name, groups=1):
    return conv2d_loop(x, p[f"{name}.weight"].data, p[f"{name}.bias"].data, groups=groups)


# -- DDCM / CAB -------------------------------------------------------------------

def test_ddcm_matches_spectral_chain_oracle():
    rng = np.random.default_rng(1)
    p = busy_store()
    x = rng.uniform(0, 1, (2, 3, 8, 4))
    got = ddcm_pre_cab(Tensor(x), p).data
    np.testing.assert_allclose(got, ddcm_chain(x, p["ddcm.freq.weight"].data), atol=1e-10)


def test_ddcm_rejects_non_rgb():
    with pytest.raises(ValueError, match="3 colour channels"):
        ddcm_pre_cab(Tensor(np.zeros((1, 4, 4, 4))), busy_store())


def test_ddcm_pre_cab_jacobian_is_block_diagonal():
    rng = np.random.default_rng(2)
    p = busy_store()
    g = SMALL.group_channels
    for _ in range(3):
        x = Tensor(rng.uniform(0, 1, (1, 3, 4, 4)), requires_grad=True)
        out = ddcm_pre_cab(x, p)
        for colour in range(3):
            seed = np.zeros(out.shape)
            seed[:, colour * g:(colour + 1) * g] = rng.standard_normal((1, g, 4, 4))
            x.grad = None
            (out * Tensor(seed)).sum().backward()
            others = [c for c in range(3) if c != colour]
            assert np.all(x.grad[:, others] == 0.0)
            assert np.abs(x.grad[:, colour]).max() > 0


def test_cab_saturated_gate_passes_input_through():
    rng = np.random.default_rng(3)
    p = busy_store()
    p["ddcm.cab.excite.bias"] = np.full(6, 20.0)
    p["ddcm.cab.excite.weight"] = np.zeros((6, p["ddcm.cab.excite.weight"].shape[1], 1, 1))
    x = rng.standard_normal((1, 6, 4, 4))
    np.testing.assert_allclose(cab_forward(Tensor(x), p).data, x, rtol=1e-8)


def test_cab_gate_closed_form():
    rng = np.random.default_rng(4)
    p = busy_store()
    x = rng.standard_normal((2, 6, 4, 4))
    pooled = x.mean(axis=(2, 3))
    w1 = p["ddcm.cab.squeeze.weight"].data[:, :, 0, 0]
    w2 = p["ddcm.cab.excite.weight"].data[:, :, 0, 0]
    hidden = silu(pooled @ w1.T + p["ddcm.cab.squeeze.bias"].data)
    gate = 1.0 / (1.0 + np.exp(-(hidden @ w2.T + p["ddcm.cab.excite.bias"].data)))
    np.testing.assert_allclose(cab_forward(Tensor(x), p).data, x * gate[:, :, None, None], rtol=1e-12)


def test_ddcm_output_shape():
    out = ddcm_forward(Tensor(np.ones((2, 3, 8, 8))), busy_store())
    assert out.shape == (2, 6, 8, 8)


# -- MCM ------------------------------------------------------------------------

def test_mcm_zero_input_zero_bias_is_zero():
    p = busy_store()
    p["mcm.conv_in.bias"] = np.zeros(6)
    p["mcm.conv_out.bias"] = np.zeros(6)
    out = mcm_forward(Tensor(np.zeros((1, 3, 8, 8))), p)
    assert out.shape == (1, 6, 8, 8)
    assert np.all(out.data == 0.0)


def test_mcm_constant_input_gives_constant_planes():
    x = np.ones((1, 3, 8, 8)) * np.array([0.2, 0.5, 0.9])[None, :, None, None]
    out = mcm_forward(Tensor(x), busy_store()).data
    np.testing.assert_allclose(out, np.broadcast_to(out[..., :1, :1], out.shape), atol=1e-12)


def test_mcm_rejects_odd_extent():
    with pytest.raises(ValueError, match="even"):
        mcm_forward(Tensor(np.zeros((1, 3, 5, 4))), busy_store())


# -- SS2D -----------------------------------------------------------------------

@settings(max_examples=15, deadline=None)
@given(d=st.integers(1, 5), n=st.integers(1, 4), h=st.sampled_from([1, 2, 3, 4]), w=st.sampled_from([1, 2, 4]),
       seed=st.integers(0, 2**31))
def test_ss2d_matches_sequential_oracle(d, n, h, w, seed):
    rng = np.random.default_rng(seed)
    p = ss_store(d, n, rng)
    x = rng.standard_normal((d, h, w))
    dirs = ss2d_directions(Tensor(x[None]), p, "s")
    ref = ss2d_sequential(x, *ss_args(p))
    for k in range(4):
        np.testing.assert_allclose(dirs[k].data[0], ref[k], atol=1e-9)
    total = ss2d_forward(Tensor(x[None]), p, "s").data[0]
    np.testing.assert_allclose(total, sum(ref.values()), atol=1e-9)


def test_ss2d_single_pixel_is_four_single_steps():
    rng = np.random.default_rng(5)
    d, n = 3, 2
    p = ss_store(d, n, rng)
    # share parameters across directions so all four single steps agree
    for name, t in p.items():
        t.data = np.broadcast_to(t.data[:1], t.shape).copy()
    x = rng.standard_normal(d)
    dt_w, dt_b, b_w, c_w, a_log, d_skip = (a[0] for a in ss_args(p))
    dt = np.log1p(np.exp(dt_w @ x + dt_b))
    bt, ct = b_w @ x, c_w @ x
    step = np.array([sum(ct[j] * dt[c] * bt[j] * x[c] for j in range(n)) + d_skip[c] * x[c] for c in range(d)])
    dirs = ss2d_directions(Tensor(x.reshape(1, d, 1, 1)), p, "s")
    for out in dirs:
        np.testing.assert_allclose(out.data.ravel(), step, atol=1e-12)
    np.testing.assert_allclose(ss2d_forward(Tensor(x.reshape(1, d, 1, 1)), p, "s").data.ravel(), 4 * step,
                               atol=1e-12)


def test_ss2d_forward_row_scan_is_causal():
    rng = np.random.default_rng(6)
    p = ss_store(4, 3, rng)
    x = rng.standard_normal((1, 4, 4, 4))
    base = ss2d_directions(Tensor(x), p, "s")[0].data.reshape(1, 4, 16)
    for t in range(16):
        y = x.reshape(1, 4, 16).copy()
        y[..., t + 1:] = rng.standard_normal(y[..., t + 1:].shape)
        out = ss2d_directions(Tensor(y.reshape(x.shape)), p, "s")[0].data.reshape(1, 4, 16)
        np.testing.assert_array_equal(out[..., :t + 1], base[..., :t + 1])


# -- LSSM -----------------------------------------------------------------------

def test_lssm_matches_composition_of_primitives():
    rng = np.random.default_rng(7)
    p = busy_store()
    pre = "lssm0"
    f_cm = rng.standard_normal((1, 6, 4, 4))
    f_cs = rng.standard_normal((1, 6, 4, 4))
    e = SMALL.expanded_channels

    def ss(x, name):
        ref = ss2d_sequential(x[0], *ss_args(p, f"{pre}.{name}"))
        return sum(ref.values())[None]

    f12 = conv_np(f_cm + f_cs, p, f"{pre}.in_proj")
    f1, f2 = f12[:, :6], f12[:, 6:]
    s1 = silu(conv_np(conv_np(f1, p, f"{pre}.expand"), p, f"{pre}.dw", groups=e))
    s1 = layer_norm_np(ss(s1, "ss1"), p[f"{pre}.ln1.gamma"].data, p[f"{pre}.ln1.beta"].data)
    s1 = conv_np(s1, p, f"{pre}.proj")
    s2 = ss(f_cs, "ss2")
    fused = layer_norm_np((s1 + s2) * silu(f2), p[f"{pre}.ln2.gamma"].data, p[f"{pre}.ln2.beta"].data)
    expected = f_cm + conv_np(silu(conv_np(fused, p, f"{pre}.mlp1")), p, f"{pre}.mlp2")
    got = lssm_forward(Tensor(f_cm), Tensor(f_cs), p, pre).data
    np.testing.assert_allclose(got, expected, atol=1e-9)


def test_lssm_zero_inputs_zero_biases_give_zero_branch():
    p = busy_store()
    for name, t in p.items():
        if name.startswith("lssm0") and name.endswith((".bias", "beta")):
            t.data = np.zeros_like(t.data)
    z = Tensor(np.zeros((1, 6, 4, 4)))
    out = lssm_forward(z, z, p, residual=False)
    assert out.shape == (1, 6, 4, 4)
    np.testing.assert_allclose(out.data, 0.0, atol=1e-12)


def test_lssm_rejects_shape_mismatch():
    with pytest.raises(ValueError, match="differ"):
        lssm_forward(Tensor(np.zeros((1, 6, 4, 4))), Tensor(np.zeros((1, 6, 2, 2))), busy_store())


# -- LGA ------------------------------------------------------------------------

def _lga_qkv(p, f_cm, f_cs):
    c = f_cm.shape[1]
    kv = conv(conv(Tensor(f_cm), p, "lga.kv1"), p, "lga.kv2", groups=2 * c).data
    q = conv(Tensor(f_cs), p, "lga.q1", groups=3)
    q = conv(conv(q, p, "lga.q2"), p, "lga.q3", groups=c).data
    return q, kv[:, :c], kv[:, c:]


def test_lga_matches_dense_attention_oracle():
    rng = np.random.default_rng(8)
    p = busy_store()
    p["lga.tau"] = np.array([0.5, 1.0, 2.0])
    f_cm = rng.standard_normal((1, 6, 4, 4))
    f_cs = rng.standard_normal((1, 6, 4, 4))
    q, k, v = _lga_qkv(p, f_cm, f_cs)
    hw = 16
    mixed, attn_ref = channel_attention_dense(q[0].reshape(6, hw), k[0].reshape(6, hw), v[0].reshape(6, hw),
                                              p["lga.tau"].data, 3, hw)
    out, attn = lga_forward(Tensor(f_cm), Tensor(f_cs), p, heads=3, return_attention=True)
    for hd in range(3):
        np.testing.assert_allclose(attn.data[0, hd], attn_ref[hd], atol=1e-12)
    expected = f_cm + conv2d_loop(mixed.reshape(1, 6, 4, 4), p["lga.out.weight"].data, p["lga.out.bias"].data)
    np.testing.assert_allclose(out.data, expected, atol=1e-10)


def test_lga_attention_rows_are_stochastic():
    rng = np.random.default_rng(9)
    p = busy_store()
    _, attn = lga_forward(Tensor(rng.standard_normal((2, 6, 4, 4))), Tensor(rng.standard_normal((2, 6, 4, 4))),
                          p, heads=3, return_attention=True)
    assert np.all(attn.data >= 0)
    np.testing.assert_allclose(attn.data.sum(axis=-1), 1.0, atol=1e-6)


def test_lga_zero_temperature_is_uniform_mean_of_values():
    rng = np.random.default_rng(10)
    p = busy_store()
    p["lga.tau"] = np.zeros(3)
    p["lga.out.weight"] = np.eye(6).reshape(6, 6, 1, 1)
    p["lga.out.bias"] = np.zeros(6)
    f_cm = rng.standard_normal((1, 6, 4, 4))
    f_cs = rng.standard_normal((1, 6, 4, 4))
    _, _, v = _lga_qkv(p, f_cm, f_cs)
    out, attn = lga_forward(Tensor(f_cm), Tensor(f_cs), p, heads=3, return_attention=True)
    np.testing.assert_allclose(attn.data, 0.5)
    head_mean = v[0].reshape(3, 2, 16).mean(axis=1, keepdims=True)
    expected = np.broadcast_to(head_mean, (3, 2, 16)).reshape(1, 6, 4, 4)
    np.testing.assert_allclose(out.data - f_cm, expected, atol=1e-12)


def test_lga_rejects_indivisible_heads():
    with pytest.raises(ValueError, match="divisible by heads"):
        lga_forward(Tensor(np.zeros((1, 6, 4, 4))), Tensor(np.zeros((1, 6, 4, 4))), busy_store(), heads=4)


# -- pyramid ----------------------------------------------------------------------

def test_ldp_constant_image_has_zero_detail_at_init():
    p = init_params(SMALL.replace(pyramid_levels=3), dtype=np.float64)
    pyr = ldp_decompose(Tensor(np.full((1, 3, 16, 16), 0.3)), p, 3)
    for hf in pyr.hf:
        assert np.all(hf.data == 0.0)
    np.testing.assert_allclose(pyr.lf.data, 0.3)


def test_ldp_three_levels_halve_resolution():
    pyr = ldp_decompose(Tensor(np.zeros((2, 3, 32, 16))), None, 3)
    assert pyr.levels == 3
    assert [hf.shape[-2:] for hf in pyr.hf] == [(32, 16), (16, 8), (8, 4)]
    assert pyr.lf.shape == (2, 3, 4, 2)


def test_ldp_rejects_indivisible_extent():
    with pytest.raises(ValueError, match="not divisible"):
        ldp_decompose(Tensor(np.zeros((1, 3, 12, 16))), None, 3)


def test_pyramid_reconstructs_input_at_init():
    rng = np.random.default_rng(11)
    p = init_params(SMALL, dtype=np.float64)
    x = rng.uniform(0, 1, (1, 3, 16, 8))
    pyr = ldp_decompose(Tensor(x), p, 2)
    np.testing.assert_allclose(ide_refine(pyr.lf, pyr, p).data, x, atol=1e-12)


def test_ide_zero_detail_is_iterated_upsampling():
    rng = np.random.default_rng(12)
    p = busy_store()
    y = rng.uniform(0, 1, (1, 3, 2, 3))
    pyr = ldp_decompose(Tensor(np.zeros((1, 3, 8, 12))), None, 2)
    out = ide_refine(Tensor(y), pyr, p).data
    ref = np.stack([bilinear_up_scalar(bilinear_up_scalar(y[0, c])) for c in range(3)])
    np.testing.assert_allclose(out[0], ref, atol=1e-12)


def test_ide_per_level_update_oracle():
    rng = np.random.default_rng(13)
    p = busy_store()
    x = rng.uniform(0, 1, (1, 3, 8, 8))
    pyr = ldp_decompose(Tensor(x), p, 2)
    y_lf = rng.uniform(0, 1, pyr.lf.shape)
    out = ide_refine(Tensor(y_lf), pyr, p).data
    y = y_lf[0]
    for lvl in (1, 0):
        up = np.stack([bilinear_up_scalar(y[c]) for c in range(3)])
        y = up + pyr.hf[lvl].data[0] * pyr.masks[lvl].data[0]
    np.testing.assert_allclose(out[0], y, atol=1e-12)


def test_ide_rejects_resolution_mismatch():
    pyr = ldp_decompose(Tensor(np.zeros((1, 3, 8, 8))), None, 2)
    with pytest.raises(ValueError, match="does not match"):
        ide_refine(Tensor(np.zeros((1, 3, 4, 4))), pyr, busy_store())


# -- full model -------------------------------------------------------------------

def test_model_is_identity_at_init():
    rng = np.random.default_rng(14)
    config = ModelConfig.from_preset("tiny")
    p = init_params(config, seed=3)
    x = rng.uniform(0, 1, (2, 3, 32, 32)).astype(np.float32)
    with no_grad():
        y = lalnet_forward(Tensor(x), p, config).data
    assert y.shape == x.shape
    assert np.abs(y - x).max() <= 1e-5


def test_trained_like_model_keeps_shape_and_is_finite():
    p = busy_store()
    y = lalnet_forward(Tensor(np.random.default_rng(15).uniform(0, 1, (1, 3, 16, 16))), p, SMALL)
    assert y.shape == (1, 3, 16, 16)
    assert np.all(np.isfinite(y.data))


def test_enhance_handles_arbitrary_sizes():
    x = np.random.default_rng(16).uniform(0, 1, (3, 19, 27)).astype(np.float32)
    config = ModelConfig.from_preset("tiny")
    y = enhance(x, init_params(config), config)
    assert y.shape == x.shape
    assert np.abs(y - x).max() <= 1e-5


def test_valid_size_is_multiple_with_pow2_low_resolution():
    config = ModelConfig.from_preset("tiny")
    for n in (1, 17, 32, 33, 100):
        v = valid_size(n, config)
        low = v // config.multiple
        assert v >= n and v % config.multiple == 0 and low & (low - 1) == 0 and low >= 4


def test_forward_names_first_missing_parameter():
    p = init_params(SMALL)
    del p.params["lga.tau"]
    with pytest.raises(MissingParameterError, match="lga.tau"):
        lalnet_forward(Tensor(np.zeros((1, 3, 16, 16), np.float32)), p, SMALL)


def test_forward_rejects_bad_input():
    p = init_params(SMALL)
    with pytest.raises(ValueError, match=r"\[B,3,H,W\]"):
        lalnet_forward(Tensor(np.zeros((1, 4, 16, 16))), p, SMALL)
    with pytest.raises(ValueError, match="not divisible"):
        lalnet_forward(Tensor(np.zeros((1, 3, 18, 16))), p, SMALL)
    with pytest.raises(ValueError, match="below the minimum"):
        lalnet_forward(Tensor(np.zeros((1, 3, 8, 8))), p, SMALL)


@pytest.mark.parametrize("variant", ["#1", "#2", "#3", "#4", "#5", "tconv", "ss2d-resblock"])
def test_ablation_variants_run_and_stay_identity(variant):
    from lalnet.architecture import ABLATION_VARIANTS
    config = SMALL.replace(**ABLATION_VARIANTS[variant])
    p = init_params(config)
    x = np.random.default_rng(17).uniform(0, 1, (1, 3, 16, 16)).astype(np.float32)
    y = lalnet_forward(Tensor(x), p, config).data
    assert np.abs(y - x).max() <= 1e-5


# -- parameters -----------------------------------------------------------------------

@pytest.mark.parametrize("config", [SMALL, ModelConfig(), ModelConfig.from_preset("tiny"),
                                    ModelConfig.from_preset("full"), SMALL.replace(pyramid_levels=4, heads=2)])
def test_parameter_count_matches_closed_form(config):
    expected = parameter_count(config.base_channels, config.lssm_blocks, config.expansion_factor,
                               config.state_dim, config.mlp_ratio, config.detail_channels, config.heads,
                               config.pyramid_levels, config.cab_reduction)
    assert expected_parameter_count(config) == expected
    assert count_parameters(init_params(config)) == expected


@pytest.mark.parametrize("name,target", [("tiny", 230_000), ("full", 2_450_000)])
def test_preset_counts_near_reported_sizes(name, target):
    n = expected_parameter_count(ModelConfig.from_preset(name))
    assert abs(n - target) <= 0.25 * target


def test_preset_level_count_default():
    for name in PRESETS:
        assert ModelConfig.from_preset(name).pyramid_levels == 3


def test_init_is_deterministic_per_seed():
    a, b, c = init_params(SMALL, seed=4), init_params(SMALL, seed=4), init_params(SMALL, seed=5)
    assert a.names() == b.names()
    assert all(np.array_equal(a[k].data, b[k].data) for k in a)
    assert any(not np.array_equal(a[k].data, c[k].data) for k in a)


def test_init_state_matrix_and_step_sizes():
    p = init_params(ModelConfig.from_preset("tiny"), dtype=np.float64)
    for name, t in p.items():
        if name.endswith("A_log"):
            a = -np.exp(t.data)
            assert np.all(a < 0)
            np.testing.assert_allclose(a[0, 0], -np.arange(1, a.shape[-1] + 1), rtol=1e-12)
        if name.endswith("dt_bias"):
            dt = np.log1p(np.exp(t.data))
            assert np.all((dt >= 0.01 - 1e-9) & (dt <= 0.1 + 1e-9))
        if name.endswith(".D"):
            assert np.all(t.data == 1.0)
    assert np.all(p["head.weight"].data == 0)


def test_config_validation():
    with pytest.raises(ValueError, match="multiple of 3"):
        ModelConfig(base_channels=8)
    with pytest.raises(ValueError, match="pyramid_levels"):
        ModelConfig(pyramid_levels=1)
    with pytest.raises(ValueError, match="unknown preset"):
        ModelConfig.from_preset("huge")
    with pytest.raises(ValueError, match="unknown ModelConfig keys"):
        ModelConfig.from_dict({"widht": 3})


# -- checkpoints --------------------------------------------------------------------------

def _store_with_adam():
    p = init_params(SMALL, seed=1)
    rng = np.random.default_rng(18)
    for name, t in p.items():
        p.m[name] = rng.standard_normal(t.shape).astype(np.float32)
        p.v[name] = rng.uniform(0, 1, t.shape).astype(np.float32)
    p.step = 17
    return p


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    p = _store_with_adam()
    path = tmp_path / "model.laln"
    save_checkpoint(p, path)
    q = load_checkpoint(path)
    assert q.names() == p.names() and q.step == 17 and q.config == SMALL
    for name in p:
        assert p[name].data.tobytes() == q[name].data.tobytes()
        assert p.m[name].tobytes() == q.m[name].tobytes()
        assert p.v[name].tobytes() == q.v[name].tobytes()
    x = Tensor(np.random.default_rng(19).uniform(0, 1, (1, 3, 16, 16)).astype(np.float32))
    assert lalnet_forward(x, p, SMALL).data.tobytes() == lalnet_forward(x, q, SMALL).data.tobytes()


def test_checkpoint_header_layout():
    blob = ckpt.dumps(init_params(SMALL))
    assert blob[:4] == b"LALN"
    assert int.from_bytes(blob[4:8], "little") == 1


def test_checkpoint_truncation_is_reported():
    blob = ckpt.dumps(init_params(SMALL))
    with pytest.raises(TruncatedCheckpointError, match="unexpected end of checkpoint"):
        ckpt.loads(blob[:len(blob) // 2])


def test_checkpoint_version_mismatch_is_reported():
    blob = bytearray(ckpt.dumps(init_params(SMALL)))
    blob[4:8] = (2).to_bytes(4, "little")
    with pytest.raises(UnsupportedVersionError, match="unsupported checkpoint version"):
        ckpt.loads(bytes(blob))


def test_checkpoint_bad_magic_and_checksum():
    blob = ckpt.dumps(init_params(SMALL))
    with pytest.raises(BadMagicError):
        ckpt.loads(b"PNG!" + blob[4:])
    corrupt = bytearray(blob)
    corrupt[200] ^= 0xFF
    with pytest.raises(ChecksumError):
        ckpt.loads(bytes(corrupt))


def test_checkpoint_missing_parameter_for_config(tmp_path):
    p = init_params(SMALL)
    del p.params["head.bias"]
    save_checkpoint(p, tmp_path / "a.laln")
    q = load_checkpoint(tmp_path / "a.laln")
    with pytest.raises(MissingParameterError, match="head.bias"):
        lalnet_forward(Tensor(np.zeros((1, 3, 16, 16), np.float32)), q, SMALL)
