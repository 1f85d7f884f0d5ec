import numpy as np
import pytest

from csk.nn import Var, no_grad
from csk.nn import autodiff as ad


def fd_grad(f, x: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function of one array."""
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        hi = f(x)
        flat[i] = orig - eps
        lo = f(x)
        flat[i] = orig
        gf[i] = (hi - lo) / (2 * eps)
    return g


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    denom = np.maximum(np.abs(a) + np.abs(b), 1e-8)
    return float(np.max(np.abs(a - b) / denom))


def test_outer_product_structure():
    # loss = sum(W @ x) with x fixed: dL/dW[i,j] = x[j]
    rng = np.random.default_rng(0)
    W = Var(rng.standard_normal((3, 4)), requires_grad=True)
    x = Var(rng.standard_normal((4, 2)))
    loss = ad.sum_(W @ x)
    loss.backward()
    expected = np.broadcast_to(x.data.sum(axis=1), (3, 4))
    np.testing.assert_allclose(W.grad, expected, rtol=1e-12)


def test_unused_parameter_gets_no_grad():
    used = Var(np.ones(3), requires_grad=True)
    unused = Var(np.ones(3), requires_grad=True)
    loss = ad.sum_(used * 2.0)
    loss.backward()
    assert unused.grad is None
    np.testing.assert_array_equal(used.grad, np.full(3, 2.0))


def test_backward_twice_raises():
    x = Var(np.ones(2), requires_grad=True)
    loss = ad.sum_(x * x)
    loss.backward()
    with pytest.raises(RuntimeError, match="twice"):
        loss.backward()


def test_backward_nonscalar_raises():
    x = Var(np.ones(3), requires_grad=True)
    y = x * 2.0
    with pytest.raises(ValueError, match="scalar"):
        y.backward()


def test_no_grad_builds_no_tape():
    x = Var(np.ones(3), requires_grad=True)
    with no_grad():
        y = ad.sum_(x * x)
    assert y._backward is None and y._parents == ()


@pytest.mark.parametrize(
    "name,fn",
    [
        ("tanh", ad.tanh),
        ("sigmoid", ad.sigmoid),
        ("exp", ad.exp),
        ("relu", ad.relu),
        ("elu", ad.elu),
    ],
)
def test_elementwise_grads_match_fd(name, fn):
    rng = np.random.default_rng(7)
    x0 = rng.standard_normal((4, 3)) * 0.7 + 0.2

    def f(arr):
        return float(fn(Var(arr)).data.sum())

    v = Var(x0.copy(), requires_grad=True)
    ad.sum_(fn(v)).backward()
    assert rel_err(v.grad, fd_grad(f, x0.copy())) < 1e-6


def test_batched_matmul_grads_match_fd():
    rng = np.random.default_rng(3)
    a0 = rng.standard_normal((2, 3, 4))
    b0 = rng.standard_normal((4, 5))

    def f_a(arr):
        return float((Var(arr) @ Var(b0)).data.sum())

    def f_b(arr):
        return float((Var(a0) @ Var(arr)).data.sum())

    a = Var(a0.copy(), requires_grad=True)
    b = Var(b0.copy(), requires_grad=True)
    ad.sum_(a @ b).backward()
    assert rel_err(a.grad, fd_grad(f_a, a0.copy())) < 1e-6
    assert rel_err(b.grad, fd_grad(f_b, b0.copy())) < 1e-6


def test_max_softmax_concat_take_grads():
    rng = np.random.default_rng(11)
    x0 = rng.standard_normal((3, 5))

    def f(arr):
        v = Var(arr)
        m = ad.max_(v, axis=1)
        s = ad.softmax(v, axis=1)
        c = ad.concat([ad.reshape(m, (3, 1)), s], axis=1)
        return float(ad.sum_(c * c).data)

    v = Var(x0.copy(), requires_grad=True)
    m = ad.max_(v, axis=1)
    s = ad.softmax(v, axis=1)
    c = ad.concat([ad.reshape(m, (3, 1)), s], axis=1)
    ad.sum_(c * c).backward()
    assert rel_err(v.grad, fd_grad(f, x0.copy())) < 1e-6


def test_layer_norm_grad():
    rng = np.random.default_rng(13)
    x0 = rng.standard_normal((4, 6))
    g0 = rng.standard_normal(6)
    b0 = rng.standard_normal(6)

    def f(arr):
        return float(ad.sum_(ad.tanh(ad.layer_norm(Var(arr), Var(g0), Var(b0)))).data)

    v = Var(x0.copy(), requires_grad=True)
    ad.sum_(ad.tanh(ad.layer_norm(v, Var(g0), Var(b0)))).backward()
    assert rel_err(v.grad, fd_grad(f, x0.copy())) < 1e-6


def test_forward_determinism():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((8, 8))
    a = ad.softmax(ad.tanh(Var(x) @ Var(x)), axis=1).data
    b = ad.softmax(ad.tanh(Var(x) @ Var(x)), axis=1).data
    np.testing.assert_array_equal(a, b)
