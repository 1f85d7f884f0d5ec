"""Policy network assembly: spec, seeded init, and forward.

Kinds: "mlp", "lstm+mlp", "cnn1d+mlp", "transformer+mlp". Sequence kinds
take time-major input (T, B, D); "mlp" takes (B, D). The action-mean head
is initialized small (gain 0.01) and the log-std is a state-independent
learnable vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import layers
from .autodiff import Var
from .params import ParamSet

KINDS = ("mlp", "lstm+mlp", "cnn1d+mlp", "transformer+mlp")


@dataclass(frozen=True)
class NetworkSpec:
    kind: str
    input_dim: int
    action_dim: int
    mlp_widths: tuple[int, ...] = (768, 512, 256)
    activation: str = "elu"
    value_head: bool = True
    lstm_hidden: int = 768
    conv_channels: tuple[int, ...] = (128, 128, 128)
    conv_kernel: int = 3
    tf_layers: int = 3
    tf_heads: int = 8
    tf_dim: int = 256
    tf_ff_mult: int = 4
    max_history: int = 16
    log_std_init: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown network kind {self.kind!r}; choose from {KINDS}")
        if self.kind == "transformer+mlp" and self.tf_dim % self.tf_heads != 0:
            raise ValueError("tf_dim must be divisible by tf_heads")

    @property
    def trunk_out(self) -> int:
        return self.mlp_widths[-1] if self.mlp_widths else self._pre_mlp_dim

    @property
    def _pre_mlp_dim(self) -> int:
        if self.kind == "mlp":
            return self.input_dim
        if self.kind == "lstm+mlp":
            return self.lstm_hidden
        if self.kind == "cnn1d+mlp":
            return self.conv_channels[-1]
        return self.tf_dim

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "input_dim": self.input_dim,
            "action_dim": self.action_dim,
            "mlp_widths": list(self.mlp_widths),
            "activation": self.activation,
            "value_head": self.value_head,
            "lstm_hidden": self.lstm_hidden,
            "conv_channels": list(self.conv_channels),
            "conv_kernel": self.conv_kernel,
            "tf_layers": self.tf_layers,
            "tf_heads": self.tf_heads,
            "tf_dim": self.tf_dim,
            "tf_ff_mult": self.tf_ff_mult,
            "max_history": self.max_history,
            "log_std_init": self.log_std_init,
        }

    @staticmethod
    def from_dict(d: dict) -> "NetworkSpec":
        d = dict(d)
        for key in ("mlp_widths", "conv_channels"):
            if key in d:
                d[key] = tuple(d[key])
        return NetworkSpec(**d)


def init_network(spec: NetworkSpec, seed: int, dtype=np.float32) -> ParamSet:
    ps = ParamSet(seed, dtype)
    if spec.kind == "lstm+mlp":
        layers.lstm_init(ps, "lstm", spec.input_dim, spec.lstm_hidden)
    elif spec.kind == "cnn1d+mlp":
        layers.conv1d_init(ps, "conv", spec.input_dim, list(spec.conv_channels), spec.conv_kernel)
    elif spec.kind == "transformer+mlp":
        layers.linear_init(ps, "proj", spec.input_dim, spec.tf_dim, gain=1.0)
        layers.transformer_init(ps, "tf", spec.tf_dim, spec.tf_layers, spec.max_history, spec.tf_ff_mult)
    layers.mlp_init(ps, "trunk", spec._pre_mlp_dim, list(spec.mlp_widths))
    layers.linear_init(ps, "head.mean", spec.trunk_out, spec.action_dim, gain=0.01)
    ps.add(
        "head.log_std",
        np.full(spec.action_dim, spec.log_std_init, dtype=dtype),
    )
    if spec.value_head:
        layers.linear_init(ps, "head.value", spec.trunk_out, 1, gain=1.0)
    return ps


def zero_state(spec: NetworkSpec, batch: int, dtype=np.float32):
    if spec.kind != "lstm+mlp":
        return None
    return (
        Var(np.zeros((batch, spec.lstm_hidden), dtype=dtype)),
        Var(np.zeros((batch, spec.lstm_hidden), dtype=dtype)),
    )


def forward(
    spec: NetworkSpec,
    ps: ParamSet,
    x,
    state=None,
    keep_mask: np.ndarray | None = None,
    valid: np.ndarray | None = None,
):
    """Run trunk and heads.

    mlp: x (B, D). Sequence kinds: x (T, B, D). Returns
    (action_mean, value, new_state); value is None without a value head.
    Raises on shape mismatch and non-finite outputs.
    """
    x = ad._as_var(x)
    if x.data.shape[-1] != spec.input_dim:
        raise ValueError(f"input dim {x.data.shape[-1]} != spec input_dim {spec.input_dim}")
    if spec.kind != "lstm+mlp" and state is not None:
        raise ValueError(f"recurrent state passed to kind {spec.kind!r}")

    new_state = None
    if spec.kind == "mlp":
        feats = x
    elif spec.kind == "lstm+mlp":
        single = x.data.ndim == 2
        seq = ad.reshape(x, (1,) + tuple(x.data.shape)) if single else x
        if state is None:
            state = zero_state(spec, seq.data.shape[1], x.data.dtype)
        if valid is not None:
            # Prefix-masked window: zero masked frames and restart the state
            # at each row's first valid frame, so the result matches a
            # physically shorter history.
            seq = ad.mul(seq, valid.T[:, :, None].astype(x.data.dtype))
            keep = np.zeros(valid.T.shape, dtype=x.data.dtype)
            keep[1:] = valid.T[:-1]
            keep_mask = keep if keep_mask is None else keep_mask * keep
        outs, new_state = layers.lstm_scan(ps, "lstm", seq, state[0], state[1], spec.lstm_hidden, keep_mask)
        feats = ad.take(outs, 0) if single else outs
    elif spec.kind == "cnn1d+mlp":
        if valid is not None:
            feats_in = ad.mul(x, valid.T[:, :, None].astype(x.data.dtype))
        else:
            feats_in = x
        feats = layers.conv1d_causal(ps, "conv", feats_in, len(spec.conv_channels), spec.conv_kernel, spec.activation)
    else:
        tokens = layers.linear(ps, "proj", x)
        feats = layers.transformer_encode(ps, "tf", tokens, spec.tf_layers, spec.tf_heads, spec.activation, valid)

    feats = layers.mlp(ps, "trunk", feats, len(spec.mlp_widths), spec.activation)
    mean = layers.linear(ps, "head.mean", feats)
    value = None
    if spec.value_head:
        value = ad.reshape(layers.linear(ps, "head.value", feats), feats.data.shape[:-1])
    ad.check_finite(mean, "action mean")
    if value is not None:
        ad.check_finite(value, "value")
    return mean, value, new_state
