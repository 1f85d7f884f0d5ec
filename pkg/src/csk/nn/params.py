"""Named parameter sets with seeded, reproducible initialization."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .autodiff import Var


def orthogonal(rng: np.random.Generator, shape: tuple[int, int], gain: float, dtype) -> np.ndarray:
    """Orthogonal matrix scaled by `gain`, sign-fixed for determinism."""
    rows, cols = shape
    a = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return (gain * q[:rows, :cols]).astype(dtype)


class ParamSet:
    """Map name -> Var with deterministic (sorted) iteration order."""

    def __init__(self, seed: int, dtype=np.float32):
        self.seed = int(seed)
        self.dtype = np.dtype(dtype)
        self._params: dict[str, Var] = {}
        self._rng = np.random.default_rng(self.seed)

    def add(self, name: str, value: np.ndarray) -> Var:
        if name in self._params:
            raise ValueError(f"duplicate parameter name: {name}")
        v = Var(np.ascontiguousarray(value, dtype=self.dtype), requires_grad=True)
        self._params[name] = v
        return v

    def add_orthogonal(self, name: str, shape: tuple[int, int], gain: float) -> Var:
        return self.add(name, orthogonal(self._rng, shape, gain, self.dtype))

    def make_orthogonal(self, shape: tuple[int, int], gain: float) -> np.ndarray:
        """Draw an orthogonal array from this set's rng without registering it."""
        return orthogonal(self._rng, shape, gain, self.dtype)

    def add_zeros(self, name: str, shape) -> Var:
        return self.add(name, np.zeros(shape, dtype=self.dtype))

    def add_normal(self, name: str, shape, scale: float) -> Var:
        return self.add(name, (scale * self._rng.standard_normal(shape)).astype(self.dtype))

    def __getitem__(self, name: str) -> Var:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self) -> list[str]:
        return sorted(self._params)

    def items(self) -> Iterator[tuple[str, Var]]:
        for name in self.names():
            yield name, self._params[name]

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: var.data for name, var in self.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        missing = set(self._params) - set(arrays)
        extra = set(arrays) - set(self._params)
        if missing or extra:
            raise ValueError(f"parameter name mismatch: missing={sorted(missing)} extra={sorted(extra)}")
        for name, arr in arrays.items():
            cur = self._params[name]
            if tuple(arr.shape) != tuple(cur.data.shape):
                raise ValueError(f"shape mismatch for {name}: {arr.shape} vs {cur.data.shape}")
            cur.data = np.ascontiguousarray(arr, dtype=self.dtype)

    def zero_grads(self) -> None:
        for v in self._params.values():
            v.grad = None

    def grads(self) -> dict[str, np.ndarray]:
        """Gradient per parameter; zeros where the parameter was unreachable."""
        return {
            name: (v.grad if v.grad is not None else np.zeros_like(v.data))
            for name, v in self.items()
        }

    def n_values(self) -> int:
        return sum(v.data.size for v in self._params.values())

    def copy(self) -> "ParamSet":
        out = ParamSet(self.seed, self.dtype)
        for name, var in self.items():
            out.add(name, var.data.copy())
        return out
