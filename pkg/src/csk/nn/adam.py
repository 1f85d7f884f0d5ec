"""Adam optimizer with bias correction."""

from __future__ import annotations

import numpy as np

from .params import ParamSet


class AdamState:
    def __init__(self, ps: ParamSet):
        self.t = 0
        self.m = {name: np.zeros_like(v.data) for name, v in ps.items()}
        self.v = {name: np.zeros_like(v.data) for name, v in ps.items()}


def adam_step(
    ps: ParamSet,
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One in-place Adam update. Raises on non-finite gradients, naming the parameter."""
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise FloatingPointError(f"non-finite gradient for parameter {name!r}")
    state.t += 1
    bc1 = 1.0 - beta1**state.t
    bc2 = 1.0 - beta2**state.t
    for name, var in ps.items():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        var.data -= (lr * (m / bc1) / (np.sqrt(v / bc2) + eps)).astype(var.data.dtype)


def clip_grad_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale all gradients in place so their global L2 norm is at most max_norm."""
    total = 0.0
    for g in grads.values():
        total += float(np.sum(g.astype(np.float64) ** 2))
    norm = float(np.sqrt(total))
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return norm
