"""Layer zoo: MLP, LSTM, causal temporal conv, causal transformer block,
and a permutation-invariant point-set encoder.

All layers are functional: parameters live in a ParamSet under a prefix,
apply functions take Vars (or arrays) and return Vars.
"""

from __future__ import annotations

import math

import numpy as np

from . import autodiff as ad
from .autodiff import Var
from .params import ParamSet

ACTIVATIONS = {
    "tanh": ad.tanh,
    "relu": ad.relu,
    "elu": ad.elu,
}


def activation(name: str):
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ValueError(f"unknown activation {name!r}; choose from {sorted(ACTIVATIONS)}") from None


# -- linear / MLP --------------------------------------------------------


def linear_init(ps: ParamSet, prefix: str, d_in: int, d_out: int, gain: float = math.sqrt(2.0)):
    ps.add_orthogonal(f"{prefix}.w", (d_in, d_out), gain)
    ps.add_zeros(f"{prefix}.b", (d_out,))


def linear(ps: ParamSet, prefix: str, x) -> Var:
    return ad.add(ad.matmul(x, ps[f"{prefix}.w"]), ps[f"{prefix}.b"])


def mlp_init(ps: ParamSet, prefix: str, d_in: int, widths: list[int], gain: float = math.sqrt(2.0)):
    d = d_in
    for i, w in enumerate(widths):
        linear_init(ps, f"{prefix}.l{i}", d, w, gain)
        d = w


def mlp(ps: ParamSet, prefix: str, x, n_layers: int, act: str) -> Var:
    f = activation(act)
    for i in range(n_layers):
        x = f(linear(ps, f"{prefix}.l{i}", x))
    return x


# -- LSTM ----------------------------------------------------------------


def lstm_init(ps: ParamSet, prefix: str, d_in: int, hidden: int):
    # Gate order i, f, g, o. Forget-gate bias starts at 1.
    ps.add_orthogonal(f"{prefix}.wih", (d_in, 4 * hidden), 1.0)
    ps.add_orthogonal(f"{prefix}.whh", (hidden, 4 * hidden), 1.0)
    b = np.zeros(4 * hidden, dtype=ps.dtype)
    b[hidden : 2 * hidden] = 1.0
    ps.add(f"{prefix}.b", b)


def lstm_cell(ps: ParamSet, prefix: str, x, h, c, hidden: int) -> tuple[Var, Var]:
    gates = ad.add(ad.add(ad.matmul(x, ps[f"{prefix}.wih"]), ad.matmul(h, ps[f"{prefix}.whh"])), ps[f"{prefix}.b"])
    i = ad.sigmoid(ad.take(gates, (Ellipsis, slice(0, hidden))))
    f = ad.sigmoid(ad.take(gates, (Ellipsis, slice(hidden, 2 * hidden))))
    g = ad.tanh(ad.take(gates, (Ellipsis, slice(2 * hidden, 3 * hidden))))
    o = ad.sigmoid(ad.take(gates, (Ellipsis, slice(3 * hidden, 4 * hidden))))
    c_new = ad.add(ad.mul(f, c), ad.mul(i, g))
    h_new = ad.mul(o, ad.tanh(c_new))
    return h_new, c_new


def lstm_scan(
    ps: ParamSet,
    prefix: str,
    xs,  # (T, B, Din) Var or array
    h0,
    c0,
    hidden: int,
    keep_mask: np.ndarray | None = None,  # (T, B) 1=carry state, 0=reset before step t
):
    """Run the cell over the leading time axis; returns (T,B,H) outputs and final state."""
    T = xs.shape[0] if isinstance(xs, np.ndarray) else xs.data.shape[0]
    h, c = h0, c0
    outs = []
    for t in range(T):
        x_t = ad.take(xs, t) if isinstance(xs, Var) else Var(xs[t])
        if keep_mask is not None:
            m = keep_mask[t][:, None]
            h = ad.mul(h, m)
            c = ad.mul(c, m)
        h, c = lstm_cell(ps, prefix, x_t, h, c, hidden)
        outs.append(ad.reshape(h, (1,) + tuple(h.data.shape)))
    return ad.concat(outs, axis=0), (h, c)


# -- causal temporal convolution ------------------------------------------


def conv1d_init(ps: ParamSet, prefix: str, d_in: int, channels: list[int], kernel: int):
    d = d_in
    for i, ch in enumerate(channels):
        w = np.stack([ps.make_orthogonal((d, ch), math.sqrt(2.0)) for _ in range(kernel)], axis=0)
        ps.add(f"{prefix}.c{i}.w", w / math.sqrt(kernel))
        ps.add_zeros(f"{prefix}.c{i}.b", (ch,))
        d = ch


def conv1d_causal(ps: ParamSet, prefix: str, x, n_layers: int, kernel: int, act: str) -> Var:
    """Stack of causal 1-D convolutions over the leading time axis of (T,B,C)."""
    f = activation(act)
    for i in range(n_layers):
        w = ps[f"{prefix}.c{i}.w"]
        b = ps[f"{prefix}.c{i}.b"]
        T = x.data.shape[0] if isinstance(x, Var) else x.shape[0]
        xp = ad.pad_axis(ad._as_var(x), 0, kernel - 1, 0)
        acc = None
        for k in range(kernel):
            term = ad.matmul(ad.take(xp, slice(k, k + T)), ad.take(w, k))
            acc = term if acc is None else ad.add(acc, term)
        x = f(ad.add(acc, b))
    return x


def conv1d_receptive_field(n_layers: int, kernel: int) -> int:
    return n_layers * (kernel - 1) + 1


# -- causal transformer ----------------------------------------------------


def transformer_init(ps: ParamSet, prefix: str, d_model: int, n_layers: int, max_len: int, ff_mult: int = 4):
    ps.add_normal(f"{prefix}.pos", (max_len, d_model), 0.02)
    for i in range(n_layers):
        p = f"{prefix}.blk{i}"
        for name in ("wq", "wk", "wv", "wo"):
            ps.add_orthogonal(f"{p}.{name}", (d_model, d_model), 1.0)
        ps.add_zeros(f"{p}.bq", (d_model,))
        ps.add_zeros(f"{p}.bk", (d_model,))
        ps.add_zeros(f"{p}.bv", (d_model,))
        ps.add_zeros(f"{p}.bo", (d_model,))
        ps.add(f"{p}.ln1.g", np.ones(d_model, dtype=ps.dtype))
        ps.add_zeros(f"{p}.ln1.b", (d_model,))
        ps.add(f"{p}.ln2.g", np.ones(d_model, dtype=ps.dtype))
        ps.add_zeros(f"{p}.ln2.b", (d_model,))
        linear_init(ps, f"{p}.ff1", d_model, ff_mult * d_model)
        linear_init(ps, f"{p}.ff2", ff_mult * d_model, d_model, gain=1.0)
    ps.add(f"{prefix}.lnf.g", np.ones(d_model, dtype=ps.dtype))
    ps.add_zeros(f"{prefix}.lnf.b", (d_model,))


def attention_mask(T: int, valid: np.ndarray | None, dtype) -> np.ndarray:
    """Additive mask (B,1,T,T): causal, keys must be valid, self always allowed."""
    causal = np.tril(np.ones((T, T), dtype=bool))
    if valid is None:
        allowed = causal[None, :, :]
    else:
        key_ok = valid[:, None, :].astype(bool) | np.eye(T, dtype=bool)[None, :, :]
        allowed = causal[None, :, :] & key_ok
    add_mask = np.where(allowed, 0.0, -1e9).astype(dtype)
    return add_mask[:, None, :, :]


def multihead_attention(ps: ParamSet, prefix: str, x, n_heads: int, add_mask: np.ndarray):
    """x: (T,B,D). Returns (out (T,B,D), probs (B,h,T,T))."""
    T, B, D = x.data.shape
    dh = D // n_heads

    def heads(v):
        v = ad.reshape(v, (T, B, n_heads, dh))
        return ad.transpose(v, (1, 2, 0, 3))  # (B,h,T,dh)

    q = heads(ad.add(ad.matmul(x, ps[f"{prefix}.wq"]), ps[f"{prefix}.bq"]))
    k = heads(ad.add(ad.matmul(x, ps[f"{prefix}.wk"]), ps[f"{prefix}.bk"]))
    v = heads(ad.add(ad.matmul(x, ps[f"{prefix}.wv"]), ps[f"{prefix}.bv"]))
    scores = ad.mul(ad.matmul(q, ad.swapaxes(k, -1, -2)), 1.0 / math.sqrt(dh))
    probs = ad.softmax(ad.add(scores, add_mask), axis=-1)
    mixed = ad.matmul(probs, v)  # (B,h,T,dh)
    out = ad.reshape(ad.transpose(mixed, (2, 0, 1, 3)), (T, B, D))
    out = ad.add(ad.matmul(out, ps[f"{prefix}.wo"]), ps[f"{prefix}.bo"])
    return out, probs


def transformer_block(ps: ParamSet, prefix: str, x, n_heads: int, add_mask: np.ndarray, act: str) -> Var:
    a, _ = multihead_attention(
        ps, prefix, ad.layer_norm(x, ps[f"{prefix}.ln1.g"], ps[f"{prefix}.ln1.b"]), n_heads, add_mask
    )
    x = ad.add(x, a)
    h = ad.layer_norm(x, ps[f"{prefix}.ln2.g"], ps[f"{prefix}.ln2.b"])
    h = linear(ps, f"{prefix}.ff2", activation(act)(linear(ps, f"{prefix}.ff1", h)))
    return ad.add(x, h)


def transformer_encode(
    ps: ParamSet,
    prefix: str,
    x,  # (T,B,D)
    n_layers: int,
    n_heads: int,
    act: str,
    valid: np.ndarray | None = None,  # (B,T) 1 = real frame, prefix-masked
) -> Var:
    """Causal encoder. Positions count from each row's first valid frame so a
    masked window is bit-equal to a physically shorter one."""
    x = ad._as_var(x)
    T, B, _ = x.data.shape
    if valid is None:
        pos = ad.reshape(ad.take(ps[f"{prefix}.pos"], slice(0, T)), (T, 1, -1))
    else:
        first = np.argmax(valid.astype(bool), axis=1)  # (B,)
        idx = np.maximum(np.arange(T)[None, :] - first[:, None], 0)  # (B,T)
        pos = ad.transpose(ad.take(ps[f"{prefix}.pos"], idx), (1, 0, 2))  # (T,B,D)
    x = ad.add(x, pos)
    mask = attention_mask(T, valid, x.data.dtype)
    for i in range(n_layers):
        x = transformer_block(ps, f"{prefix}.blk{i}", x, n_heads, mask, act)
    return ad.layer_norm(x, ps[f"{prefix}.lnf.g"], ps[f"{prefix}.lnf.b"])


# -- point-set encoder -----------------------------------------------------


def pointset_init(ps: ParamSet, prefix: str, d_point: int, widths: list[int]):
    mlp_init(ps, prefix, d_point, widths)


def pointset_encode(ps: ParamSet, prefix: str, points, n_layers: int, act: str) -> Var:
    """points (..., N, C) -> (..., E): shared per-point MLP then max over N."""
    h = mlp(ps, prefix, points, n_layers, act)
    return ad.max_(h, axis=-2)
