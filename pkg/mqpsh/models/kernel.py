"""
Convolution profiles Phi for the sup-convolution engine.

- quadratic: Phi(v) = -theta * |v|^2, semiconvex with any delta >= theta
- radial: Phi(v) = f(|v|) for a nonincreasing u.s.c. profile f
- tabulated: Phi sampled on a centered box, nearest-node lookup, NEG_INF outside
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from mqpsh.core.errors import KernelError
from mqpsh.models.grid import NEG_INF, ScalarField, squared_norm, validate_ext_real

KernelKind = Literal["quadratic", "radial", "tabulated"]

LADDER_POINTS = 257
LADDER_MAX = 16.0


def check_nonincreasing(f: Callable, ladder_max: float = LADDER_MAX, points: int = LADDER_POINTS) -> np.ndarray:
    """Sample f on [0, ladder_max] and reject any increase. Returns the samples."""
    ladder = np.linspace(0.0, ladder_max, points)
    try:
        raw = f(ladder)
    except Exception as exc:
        raise KernelError(f"profile could not be evaluated on the sample ladder: {exc}") from exc
    values = validate_ext_real(raw, "profile samples")
    if values.shape != ladder.shape:
        raise KernelError("profile must be vectorized: one value per ladder point")
    with np.errstate(invalid="ignore"):
        rises = np.diff(values) > 1e-12 * (1.0 + np.abs(values[:-1]))
    rises &= np.isfinite(values[1:])
    if rises.any():
        at = int(np.flatnonzero(rises)[0])
        raise KernelError(f"profile increases between t={ladder[at]:.4g} and t={ladder[at + 1]:.4g}")
    return values


@dataclass(frozen=True, eq=False)
class Kernel:
    kind: KernelKind
    theta: Optional[float] = None
    profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    table: Optional[ScalarField] = None
    semiconvex_delta: Optional[float] = None
    name: str = ""

    # ---- constructors ----

    @classmethod
    def quadratic(cls, theta: float, semiconvex_delta: Optional[float] = None) -> "Kernel":
        theta = float(theta)
        if not (np.isfinite(theta) and theta > 0):
            raise KernelError(f"theta must be > 0, got {theta}")
        delta = theta if semiconvex_delta is None else float(semiconvex_delta)
        if delta < theta:
            raise KernelError(f"semiconvex_delta {delta} must be >= theta {theta}")
        return cls("quadratic", theta=theta, semiconvex_delta=delta, name=f"quadratic({theta:g})")

    @classmethod
    def radial(cls, f: Callable, name: str = "radial", semiconvex_delta: Optional[float] = None) -> "Kernel":
        check_nonincreasing(f)
        return cls("radial", profile=f, semiconvex_delta=semiconvex_delta, name=name)

    @classmethod
    def tabulated(cls, table: ScalarField, semiconvex_delta: Optional[float] = None) -> "Kernel":
        lo = np.asarray(table.grid.lo)
        hi = np.asarray(table.grid.hi)
        if not np.allclose(lo, -hi, atol=1e-12):
            raise KernelError("tabulated kernel must live on a box centered at the origin")
        return cls("tabulated", table=table, semiconvex_delta=semiconvex_delta, name="tabulated")

    # ---- evaluation ----

    def evaluate(self, displacements: np.ndarray) -> np.ndarray:
        """Phi at real displacements of shape (..., 2n)."""
        d = np.asarray(displacements, dtype=float)
        if self.kind == "quadratic":
            return -self.theta * squared_norm(d)
        if self.kind == "radial":
            r = np.sqrt(squared_norm(d))
            return validate_ext_real(self.profile(r), "kernel profile")
        return self._lookup(d)

    def _lookup(self, d: np.ndarray) -> np.ndarray:
        grid = self.table.grid
        flat = d.reshape(-1, grid.real_dim)
        inside = grid.contains(flat)
        out = np.full(flat.shape[0], NEG_INF)
        if inside.any():
            idx, _ = grid.nearest_index(flat[inside], strict=False)
            out[inside] = self.table.values[idx]
        return out.reshape(d.shape[:-1])

    def value_at_origin(self, real_dim: int) -> float:
        return float(self.evaluate(np.zeros((1, real_dim)))[0])

    def is_nonpositive(self, real_dim: int) -> bool:
        if self.kind == "quadratic":
            return True
        if self.kind == "radial":
            return self.value_at_origin(real_dim) <= 0.0
        return float(self.table.values.max()) <= 0.0

    def is_identically_neg_inf(self, real_dim: int) -> bool:
        if self.kind == "quadratic":
            return False
        if self.kind == "radial":
            return self.value_at_origin(real_dim) == NEG_INF
        return self.table.is_neg_inf

    def describe(self) -> str:
        return self.name or self.kind
