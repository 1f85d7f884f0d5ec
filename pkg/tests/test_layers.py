import numpy as np
import pytest

from _gradcheck import LAYER_KINDS, check_case
from csk.nn import NetworkSpec, ParamSet, Var, forward, init_network, layers
from csk.nn import autodiff as ad


def test_identity_linear_passthrough():
    ps = ParamSet(0, np.float64)
    ps.add("lin.w", np.eye(2))
    ps.add_zeros("lin.b", (2,))
    out = layers.linear(ps, "lin", Var(np.array([[1.0, 2.0]])))
    np.testing.assert_array_equal(out.data, [[1.0, 2.0]])


def test_zero_initialized_lstm_cell_outputs_zero():
    hidden = 4
    ps = ParamSet(0, np.float64)
    ps.add_zeros("lstm.wih", (3, 4 * hidden))
    ps.add_zeros("lstm.whh", (hidden, 4 * hidden))
    ps.add_zeros("lstm.b", (4 * hidden,))
    x = Var(np.random.default_rng(1).standard_normal((2, 3)))
    h = Var(np.zeros((2, hidden)))
    c = Var(np.zeros((2, hidden)))
    h2, c2 = layers.lstm_cell(ps, "lstm", x, h, c, hidden)
    np.testing.assert_array_equal(h2.data, np.zeros((2, hidden)))
    np.testing.assert_array_equal(c2.data, np.zeros((2, hidden)))


def test_two_layer_mlp_matches_scalar_chain():
    # Straight-line scalar reimplementation of a seeded 2-layer tanh MLP.
    spec = NetworkSpec(kind="mlp", input_dim=3, action_dim=2, mlp_widths=(4, 3), activation="tanh")
    ps = init_network(spec, seed=42, dtype=np.float64)
    x = np.random.default_rng(9).standard_normal((1, 3))
    mean, value, _ = forward(spec, ps, x)

    def scalar_linear(xv, w, b):
        out = []
        for j in range(w.shape[1]):
            acc = b[j]
            for i in range(w.shape[0]):
                acc += xv[i] * w[i, j]
            out.append(acc)
        return out

    h = [float(v) for v in x[0]]
    for li in range(2):
        w, b = ps[f"trunk.l{li}.w"].data, ps[f"trunk.l{li}.b"].data
        h = [np.tanh(v) for v in scalar_linear(h, w, b)]
    expect_mean = scalar_linear(h, ps["head.mean.w"].data, ps["head.mean.b"].data)
    expect_value = scalar_linear(h, ps["head.value.w"].data, ps["head.value.b"].data)
    np.testing.assert_allclose(mean.data[0], expect_mean, rtol=1e-12)
    np.testing.assert_allclose(value.data, expect_value, rtol=1e-12)


def test_seeded_init_is_bit_identical():
    spec = NetworkSpec(kind="lstm+mlp", input_dim=5, action_dim=2, mlp_widths=(8,), lstm_hidden=6)
    a = init_network(spec, seed=7, dtype=np.float64)
    b = init_network(spec, seed=7, dtype=np.float64)
    for (na, va), (nb, vb) in zip(a.items(), b.items()):
        assert na == nb
        np.testing.assert_array_equal(va.data, vb.data)


def test_param_names_sorted_and_unique():
    spec = NetworkSpec(kind="transformer+mlp", input_dim=5, action_dim=2, mlp_widths=(8,), tf_layers=1, tf_heads=2, tf_dim=8)
    ps = init_network(spec, seed=1)
    names = ps.names()
    assert names == sorted(names) and len(names) == len(set(names))
    with pytest.raises(ValueError, match="duplicate"):
        ps.add(names[0], np.zeros(1))


@pytest.mark.parametrize("kind", LAYER_KINDS)
def test_gradcheck_small_sample(kind):
    for seed in range(3):
        assert check_case(kind, seed) < 1e-4


def test_transformer_causality_bit_exact():
    spec = NetworkSpec(
        kind="transformer+mlp", input_dim=4, action_dim=2, mlp_widths=(6,),
        tf_layers=2, tf_heads=2, tf_dim=8, max_history=8,
    )
    ps = init_network(spec, seed=3, dtype=np.float64)
    rng = np.random.default_rng(5)
    x = rng.standard_normal((6, 2, 4))
    mean_a, _, _ = forward(spec, ps, x)
    x2 = x.copy()
    x2[4:] += rng.standard_normal((2, 2, 4))  # perturb only t > 3
    mean_b, _, _ = forward(spec, ps, x2)
    np.testing.assert_array_equal(mean_a.data[:4], mean_b.data[:4])


def test_cnn_causality_bit_exact():
    spec = NetworkSpec(
        kind="cnn1d+mlp", input_dim=4, action_dim=2, mlp_widths=(6,),
        conv_channels=(5, 5), conv_kernel=3,
    )
    ps = init_network(spec, seed=3, dtype=np.float64)
    rng = np.random.default_rng(5)
    x = rng.standard_normal((6, 2, 4))
    mean_a, _, _ = forward(spec, ps, x)
    x2 = x.copy()
    x2[4:] += 1.0
    mean_b, _, _ = forward(spec, ps, x2)
    np.testing.assert_array_equal(mean_a.data[:4], mean_b.data[:4])


def test_attention_softmax_rows_sum_to_one():
    ps = ParamSet(0, np.float64)
    d, heads, T, B = 8, 2, 5, 3
    for name in ("wq", "wk", "wv", "wo"):
        ps.add_orthogonal(f"att.{name}", (d, d), 1.0)
    for name in ("bq", "bk", "bv", "bo"):
        ps.add_zeros(f"att.{name}", (d,))
    x = Var(np.random.default_rng(2).standard_normal((T, B, d)))
    valid = (np.arange(T)[None, :] >= np.array([0, 2, 4])[:, None]).astype(float)
    mask = layers.attention_mask(T, valid, np.float64)
    _, probs = layers.multihead_attention(ps, "att", x, heads, mask)
    sums = probs.data.sum(axis=-1)
    np.testing.assert_allclose(sums, np.ones_like(sums), atol=1e-12)


def test_pointset_permutation_invariance_bit_exact():
    ps = ParamSet(1, np.float64)
    layers.pointset_init(ps, "enc", 4, [8, 8])
    rng = np.random.default_rng(4)
    pts = rng.standard_normal((10, 4))
    emb = layers.pointset_encode(ps, "enc", Var(pts), 2, "tanh").data
    perm = rng.permutation(10)
    emb_p = layers.pointset_encode(ps, "enc", Var(pts[perm]), 2, "tanh").data
    np.testing.assert_array_equal(emb, emb_p)


def test_pointset_identical_points_equal_pointwise_output():
    ps = ParamSet(1, np.float64)
    layers.pointset_init(ps, "enc", 4, [8])
    p = np.random.default_rng(4).standard_normal(4)
    pts = np.tile(p, (6, 1))
    emb = layers.pointset_encode(ps, "enc", Var(pts), 1, "tanh").data
    single = layers.mlp(ps, "enc", Var(p[None, :]), 1, "tanh").data[0]
    np.testing.assert_allclose(emb, single, rtol=1e-15)


def test_pointset_duplicating_argmax_point_is_noop():
    ps = ParamSet(2, np.float64)
    layers.pointset_init(ps, "enc", 4, [8, 6])
    rng = np.random.default_rng(8)
    pts = rng.standard_normal((12, 4))
    per_point = layers.mlp(ps, "enc", Var(pts), 2, "tanh").data
    emb = layers.pointset_encode(ps, "enc", Var(pts), 2, "tanh").data
    # duplicate every point that achieves a channel max
    winners = np.unique(per_point.argmax(axis=0))
    pts_dup = np.concatenate([pts, pts[winners]], axis=0)
    emb_dup = layers.pointset_encode(ps, "enc", Var(pts_dup), 2, "tanh").data
    np.testing.assert_array_equal(emb, emb_dup)


def test_pointset_wrong_channel_count_raises():
    ps = ParamSet(1, np.float64)
    layers.pointset_init(ps, "enc", 4, [8])
    with pytest.raises(ValueError):
        layers.pointset_encode(ps, "enc", Var(np.zeros((5, 3))), 1, "tanh")


def test_forward_shape_mismatch_raises():
    spec = NetworkSpec(kind="mlp", input_dim=4, action_dim=2, mlp_widths=(4,))
    ps = init_network(spec, seed=0)
    with pytest.raises(ValueError, match="input dim"):
        forward(spec, ps, np.zeros((1, 3)))
    with pytest.raises(ValueError, match="state"):
        forward(spec, ps, np.zeros((1, 4)), state=(1, 2))


def test_forward_nonfinite_raises():
    spec = NetworkSpec(kind="mlp", input_dim=2, action_dim=1, mlp_widths=(3,))
    ps = init_network(spec, seed=0, dtype=np.float64)
    with pytest.raises(FloatingPointError):
        forward(spec, ps, np.array([[np.inf, 1.0]]))


def test_masked_lstm_window_equals_rebuilt_history():
    spec = NetworkSpec(kind="lstm+mlp", input_dim=3, action_dim=2, mlp_widths=(5,), lstm_hidden=4)
    ps = init_network(spec, seed=11, dtype=np.float64)
    rng = np.random.default_rng(0)
    x = rng.standard_normal((6, 1, 3))
    valid = np.array([[0, 0, 1, 1, 1, 1]], dtype=float)
    mean_masked, _, _ = forward(spec, ps, x, valid=valid)
    mean_rebuilt, _, _ = forward(spec, ps, x[2:])
    np.testing.assert_allclose(mean_masked.data[-1], mean_rebuilt.data[-1], rtol=1e-12)


def test_masked_transformer_window_equals_rebuilt_history():
    spec = NetworkSpec(
        kind="transformer+mlp", input_dim=3, action_dim=2, mlp_widths=(5,),
        tf_layers=1, tf_heads=2, tf_dim=8, max_history=8,
    )
    ps = init_network(spec, seed=11, dtype=np.float64)
    rng = np.random.default_rng(0)
    x = rng.standard_normal((6, 1, 3))
    valid = np.array([[0, 0, 1, 1, 1, 1]], dtype=float)
    mean_masked, _, _ = forward(spec, ps, x, valid=valid)
    mean_rebuilt, _, _ = forward(spec, ps, x[2:])
    np.testing.assert_allclose(mean_masked.data[-1], mean_rebuilt.data[-1], atol=1e-12)
