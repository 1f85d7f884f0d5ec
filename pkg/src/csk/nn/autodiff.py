"""Reverse-mode automatic differentiation on numpy arrays.

The tape is rebuilt on every forward call: each op appends a node holding
its parents and a backward closure. `backward()` walks the tape once in
reverse topological order and then invalidates it.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Iterable, Sequence

import numpy as np

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable tape construction inside the block (inference mode)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Var:
    """A tensor node: numpy payload plus optional tape linkage."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_spent")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        parents: tuple = (),
        backward: Callable | None = None,
    ):
        self.data = np.asarray(data)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._backward = backward
        self._spent = False

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Var":
        return Var(self.data)

    def __repr__(self):
        return f"Var(shape={self.data.shape}, dtype={self.data.dtype}, grad={self.requires_grad})"

    # -- operator sugar ------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, p):
        return power(self, p)

    def __getitem__(self, idx):
        return take(self, idx)

    def backward(self) -> None:
        """Accumulate gradients of this scalar into `.grad` of all tape leaves."""
        if self.data.size != 1:
            raise ValueError(f"backward requires a scalar loss, got shape {self.data.shape}")
        if self._spent:
            raise RuntimeError("backward called twice on the same graph")

        order: list[Var] = []
        seen: set[int] = set()
        stack: list[tuple[Var, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))

        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
            node._spent = True
            if node is not self:
                node._backward = None
                node._parents = ()


def _as_var(x) -> Var:
    return x if isinstance(x, Var) else Var(np.asarray(x))


def _tracing(*vs: Var) -> bool:
    return _grad_enabled and any(v.requires_grad for v in vs)


def _make(data, parents: Sequence[Var], backward: Callable | None) -> Var:
    if backward is not None:
        return Var(data, requires_grad=True, parents=tuple(parents), backward=backward)
    return Var(data)


def _accum(v: Var, g: np.ndarray) -> None:
    if not v.requires_grad:
        return
    if v.grad is None:
        v.grad = g.copy() if isinstance(g, np.ndarray) else np.asarray(g)
    else:
        v.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `g` down to `shape` (inverse of numpy broadcasting)."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# -- primitive ops ------------------------------------------------------


def add(a, b) -> Var:
    a, b = _as_var(a), _as_var(b)
    out = a.data + b.data
    if not _tracing(a, b):
        return Var(out)

    def bw(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(g, b.data.shape))

    return _make(out, (a, b), bw)


def sub(a, b) -> Var:
    a, b = _as_var(a), _as_var(b)
    out = a.data - b.data
    if not _tracing(a, b):
        return Var(out)

    def bw(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(-g, b.data.shape))

    return _make(out, (a, b), bw)


def mul(a, b) -> Var:
    a, b = _as_var(a), _as_var(b)
    out = a.data * b.data
    if not _tracing(a, b):
        return Var(out)

    def bw(g):
        _accum(a, _unbroadcast(g * b.data, a.data.shape))
        _accum(b, _unbroadcast(g * a.data, b.data.shape))

    return _make(out, (a, b), bw)


def div(a, b) -> Var:
    a, b = _as_var(a), _as_var(b)
    out = a.data / b.data
    if not _tracing(a, b):
        return Var(out)

    def bw(g):
        _accum(a, _unbroadcast(g / b.data, a.data.shape))
        _accum(b, _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

    return _make(out, (a, b), bw)


def power(a, p: float) -> Var:
    a = _as_var(a)
    out = a.data**p
    if not _tracing(a):
        return Var(out)

    def bw(g):
        _accum(a, g * p * a.data ** (p - 1))

    return _make(out, (a,), bw)


def matmul(a, b) -> Var:
    """Matrix product; supports stacked (batched) operands like numpy `@`."""
    a, b = _as_var(a), _as_var(b)
    out = a.data @ b.data
    if not _tracing(a, b):
        return Var(out)

    def bw(g):
        if a.requires_grad:
            ga = g @ np.swapaxes(b.data, -1, -2) if b.data.ndim > 1 else np.outer(g, b.data)
            _accum(a, _unbroadcast(ga, a.data.shape))
        if b.requires_grad:
            gb = np.swapaxes(a.data, -1, -2) @ g if a.data.ndim > 1 else np.outer(a.data, g)
            _accum(b, _unbroadcast(gb, b.data.shape))

    return _make(out, (a, b), bw)


def exp(a) -> Var:
    a = _as_var(a)
    out = np.exp(a.data)
    if not _tracing(a):
        return Var(out)

    def bw(g):
        _accum(a, g * out)

    return _make(out, (a,), bw)


def log(a) -> Var:
    a = _as_var(a)
    out = np.log(a.data)
    if not _tracing(a):
        return Var(out)

    def bw(g):
        _accum(a, g / a.data)

    return _make(out, (a,), bw)


def tanh(a) -> Var:
    a = _as_var(a)
    out = np.tanh(a.data)
    if not _tracing(a):
        return Var(out)

    def bw(g):
        _accum(a, g * (1.0 - out * out))

    return _make(out, (a,), bw)


def sigmoid(a) -> Var:
    a = _as_var(a)
    out = 1.0 / (1.0 + np.exp(-a.data))
    if not _tracing(a):
        return Var(out)

    def bw(g):
        _accum(a, g * out * (1.0 - out))

    return _make(out, (a,), bw)


def relu(a) -> Var:
    a = _as_var(a)
    out = np.maximum(a.data, 0.0)
    if not _tracing(a):
        return Var(out)
    mask = a.data > 0.0

    def bw(g):
        _accum(a, g * mask)

    return _make(out, (a,), bw)


def elu(a, alpha: float = 1.0) -> Var:
    a = _as_var(a)
    neg = alpha * (np.exp(np.minimum(a.data, 0.0)) - 1.0)
    out = np.where(a.data > 0.0, a.data, neg)
    if not _tracing(a):
        return Var(out)
    mask = a.data > 0.0

    def bw(g):
        _accum(a, g * np.where(mask, 1.0, neg + alpha))

    return _make(out, (a,), bw)


def sum_(a, axis=None, keepdims: bool = False) -> Var:
    a = _as_var(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)
    if not _tracing(a):
        return Var(out)
    shape = a.data.shape

    def bw(g):
        if axis is None:
            _accum(a, np.broadcast_to(g, shape).copy())
            return
        if not keepdims:
            axes = axis if isinstance(axis, tuple) else (axis,)
            g = np.expand_dims(g, axes)
        _accum(a, np.broadcast_to(g, shape).copy())

    return _make(out, (a,), bw)


def mean(a, axis=None, keepdims: bool = False) -> Var:
    a = _as_var(a)
    n = a.data.size if axis is None else np.prod(
        [a.data.shape[ax] for ax in (axis if isinstance(axis, tuple) else (axis,))]
    )
    return mul(sum_(a, axis=axis, keepdims=keepdims), 1.0 / float(n))


def max_(a, axis: int, keepdims: bool = False) -> Var:
    """Max along one axis; gradient flows to the first argmax (deterministic)."""
    a = _as_var(a)
    out = a.data.max(axis=axis, keepdims=keepdims)
    if not _tracing(a):
        return Var(out)
    idx = a.data.argmax(axis=axis)

    def bw(g):
        if not keepdims:
            g = np.expand_dims(g, axis)
        gi = np.expand_dims(idx, axis)
        full = np.zeros_like(a.data)
        np.put_along_axis(full, gi, g, axis)
        _accum(a, full)

    return _make(out, (a,), bw)


def reshape(a, shape) -> Var:
    a = _as_var(a)
    out = a.data.reshape(shape)
    if not _tracing(a):
        return Var(out)
    orig = a.data.shape

    def bw(g):
        _accum(a, g.reshape(orig))

    return _make(out, (a,), bw)


def swapaxes(a, ax1: int, ax2: int) -> Var:
    a = _as_var(a)
    out = np.swapaxes(a.data, ax1, ax2)
    if not _tracing(a):
        return Var(out)

    def bw(g):
        _accum(a, np.swapaxes(g, ax1, ax2))

    return _make(out, (a,), bw)


def transpose(a, axes) -> Var:
    a = _as_var(a)
    out = np.transpose(a.data, axes)
    if not _tracing(a):
        return Var(out)
    inv = np.argsort(axes)

    def bw(g):
        _accum(a, np.transpose(g, inv))

    return _make(out, (a,), bw)


def concat(parts: Iterable, axis: int = -1) -> Var:
    parts = [_as_var(p) for p in parts]
    out = np.concatenate([p.data for p in parts], axis=axis)
    if not _tracing(*parts):
        return Var(out)
    sizes = [p.data.shape[axis] for p in parts]
    splits = np.cumsum(sizes)[:-1]

    def bw(g):
        for p, gp in zip(parts, np.split(g, splits, axis=axis)):
            _accum(p, gp)

    return _make(out, tuple(parts), bw)


def take(a, idx) -> Var:
    """Basic/advanced indexing with gradient scatter-add."""
    a = _as_var(a)
    out = a.data[idx]
    if not _tracing(a):
        return Var(out)

    def bw(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        _accum(a, full)

    return _make(out, (a,), bw)


def pad_axis(a, axis: int, before: int, after: int) -> Var:
    """Zero-pad one axis."""
    a = _as_var(a)
    widths = [(0, 0)] * a.data.ndim
    widths[axis] = (before, after)
    out = np.pad(a.data, widths)
    if not _tracing(a):
        return Var(out)
    sl = [slice(None)] * a.data.ndim
    sl[axis] = slice(before, before + a.data.shape[axis])
    sl = tuple(sl)

    def bw(g):
        _accum(a, g[sl])

    return _make(out, (a,), bw)


def where_const(cond: np.ndarray, a, b) -> Var:
    """Select with a constant (non-differentiable) condition mask."""
    a, b = _as_var(a), _as_var(b)
    out = np.where(cond, a.data, b.data)
    if not _tracing(a, b):
        return Var(out)

    def bw(g):
        _accum(a, _unbroadcast(np.where(cond, g, 0.0), a.data.shape))
        _accum(b, _unbroadcast(np.where(cond, 0.0, g), b.data.shape))

    return _make(out, (a, b), bw)


# -- composites ----------------------------------------------------------


def softmax(a, axis: int = -1) -> Var:
    a = _as_var(a)
    shift = Var(a.data.max(axis=axis, keepdims=True))  # constant, no grad path
    e = exp(sub(a, shift))
    return div(e, sum_(e, axis=axis, keepdims=True))


def layer_norm(x, gain, bias, eps: float = 1e-5) -> Var:
    """Normalize over the last axis, then scale and shift."""
    mu = mean(x, axis=-1, keepdims=True)
    centered = sub(x, mu)
    var = mean(mul(centered, centered), axis=-1, keepdims=True)
    inv = power(add(var, eps), -0.5)
    return add(mul(mul(centered, inv), gain), bias)


def check_finite(x: Var, context: str) -> Var:
    if not np.isfinite(x.data).all():
        raise FloatingPointError(f"non-finite values in {context}")
    return x
