from . import autodiff, layers
from .adam import AdamState, adam_step, clip_grad_norm
from .autodiff import Var, no_grad
from .checkpoint import load_checkpoint, save_checkpoint
from .network import KINDS, NetworkSpec, forward, init_network, zero_state
from .params import ParamSet

__all__ = [
    "AdamState",
    "KINDS",
    "NetworkSpec",
    "ParamSet",
    "Var",
    "adam_step",
    "autodiff",
    "clip_grad_norm",
    "forward",
    "init_network",
    "layers",
    "load_checkpoint",
    "no_grad",
    "save_checkpoint",
    "zero_state",
]
