"""
Grid geometry and extended-real scalar fields.

- BoxGrid: a uniform box in R^{2n}, axes ordered (x_1..x_n, y_1..y_n)
- ScalarField: one extended real per node, NEG_INF stored as IEEE -inf
- ext_* helpers: the arithmetic contracts for NEG_INF
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Optional, Sequence

import numpy as np

from mqpsh.core.errors import GridError, InputError

NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# Extended reals
# ---------------------------------------------------------------------------

def validate_ext_real(values, what: str = "values") -> np.ndarray:
    arr = np.array(values, dtype=float)
    if np.isnan(arr).any():
        bad = int(np.flatnonzero(np.isnan(arr.ravel()))[0])
        raise InputError(f"{what}: NaN at position {bad}")
    if np.isposinf(arr).any():
        bad = int(np.flatnonzero(np.isposinf(arr.ravel()))[0])
        raise InputError(f"{what}: +inf at position {bad}")
    return arr


def ext_add(a, b) -> np.ndarray:
    """NEG_INF + x = NEG_INF; both operands must already be valid extended reals."""
    return np.add(a, b)


def ext_sub_finite(a, b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if not np.isfinite(b).all():
        raise InputError("subtrahend must be finite")
    return np.subtract(a, b)


def ext_scale(c: float, a) -> np.ndarray:
    """c * a for c >= 0, with 0 * NEG_INF = 0."""
    if c < 0:
        raise InputError(f"scale must be >= 0, got {c}")
    a = np.asarray(a, dtype=float)
    if c == 0:
        return np.zeros_like(a)
    return c * a


def ext_max(*arrays) -> np.ndarray:
    return reduce(np.maximum, arrays)


def ext_min(*arrays) -> np.ndarray:
    return reduce(np.minimum, arrays)


def squared_norm(d: np.ndarray) -> np.ndarray:
    """Sum of squares over the last axis, accumulated in axis order."""
    d = np.asarray(d, dtype=float)
    total = d[..., 0] * d[..., 0]
    for i in range(1, d.shape[-1]):
        total = total + d[..., i] * d[..., i]
    return total


def to_complex(real_points: np.ndarray) -> np.ndarray:
    real_points = np.asarray(real_points, dtype=float)
    n = real_points.shape[-1] // 2
    return real_points[..., :n] + 1j * real_points[..., n:]


def to_real(complex_points: np.ndarray) -> np.ndarray:
    z = np.asarray(complex_points, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)


# ---------------------------------------------------------------------------
# BoxGrid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxGrid:
    dim_complex: int
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        object.__setattr__(self, "counts", tuple(int(v) for v in self.counts))

        if self.dim_complex < 1:
            raise GridError(f"dim_complex must be >= 1, got {self.dim_complex}")
        d = 2 * self.dim_complex
        if not (len(self.lo) == len(self.hi) == len(self.counts) == d):
            raise GridError(f"lo, hi and counts must all have length {d}")
        for i in range(d):
            if not (np.isfinite(self.lo[i]) and np.isfinite(self.hi[i])):
                raise GridError(f"axis {i}: bounds must be finite")
            if not self.lo[i] < self.hi[i]:
                raise GridError(f"axis {i}: lo {self.lo[i]} must be < hi {self.hi[i]}")
            if self.counts[i] < 2:
                raise GridError(f"axis {i}: counts must be >= 2, got {self.counts[i]}")

    @classmethod
    def cube(cls, dim_complex: int, half_width: float, count: int, center: Optional[Sequence[float]] = None) -> "BoxGrid":
        d = 2 * dim_complex
        c = np.zeros(d) if center is None else np.asarray(center, dtype=float)
        return cls(dim_complex, tuple(c - half_width), tuple(c + half_width), (count,) * d)

    @property
    def real_dim(self) -> int:
        return 2 * self.dim_complex

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @cached_property
    def spacing(self) -> np.ndarray:
        return (np.asarray(self.hi) - np.asarray(self.lo)) / (np.asarray(self.counts) - 1)

    def axis_coords(self, axis: int) -> np.ndarray:
        return np.linspace(self.lo[axis], self.hi[axis], self.counts[axis])

    # ---- indexing ----

    def ravel(self, multi_index) -> np.ndarray:
        multi = np.asarray(multi_index, dtype=np.intp)
        return np.ravel_multi_index(tuple(np.moveaxis(multi, -1, 0)), self.counts)

    def unravel(self, index) -> np.ndarray:
        return np.stack(np.unravel_index(np.asarray(index, dtype=np.intp), self.counts), axis=-1)

    @cached_property
    def strides(self) -> np.ndarray:
        """Linear-index step for a unit move along each axis."""
        out = np.ones(self.real_dim, dtype=np.intp)
        for axis in range(self.real_dim - 2, -1, -1):
            out[axis] = out[axis + 1] * self.counts[axis + 1]
        return out

    # ---- coordinates ----

    @cached_property
    def _points(self) -> np.ndarray:
        axes = [self.axis_coords(i) for i in range(self.real_dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        pts.setflags(write=False)
        return pts

    def points(self) -> np.ndarray:
        """Real coordinates of every node, shape (size, 2n), node order."""
        return self._points

    def complex_points(self) -> np.ndarray:
        return to_complex(self._points)

    def coords(self, index: int) -> np.ndarray:
        return self._points[int(index)]

    # ---- regions ----

    def margin_mask(self, margin: int) -> np.ndarray:
        """Nodes at least `margin` nodes away from every face."""
        multi = self.unravel(np.arange(self.size))
        counts = np.asarray(self.counts)
        return np.all((multi >= margin) & (multi <= counts - 1 - margin), axis=-1)

    @cached_property
    def interior_mask(self) -> np.ndarray:
        """Nodes with a full central stencil."""
        mask = self.margin_mask(1)
        mask.setflags(write=False)
        return mask

    @property
    def boundary_mask(self) -> np.ndarray:
        return ~self.interior_mask

    def nearest_index(self, real_points: np.ndarray, strict: bool = True) -> tuple[np.ndarray, np.ndarray]:
        """
        Nearest node for each point, plus the per-point lookup error.

        Points outside the box (beyond rounding) raise GridError when strict.
        """
        pts = np.asarray(real_points, dtype=float)
        lo = np.asarray(self.lo)
        h = self.spacing
        raw = (pts - lo) / h
        multi = np.rint(raw).astype(np.intp)
        counts = np.asarray(self.counts)
        outside = np.any((raw < -1e-9) | (raw > counts - 1 + 1e-9), axis=-1)
        if strict and np.any(outside):
            first = pts.reshape(-1, self.real_dim)[int(np.flatnonzero(outside.ravel())[0])]
            raise GridError(f"point {first.tolist()} lies outside the grid box")
        multi = np.clip(multi, 0, counts - 1)
        node_pts = lo + multi * h
        err = np.max(np.abs(node_pts - pts) / h, axis=-1)
        return self.ravel(multi), err

    def contains(self, real_points: np.ndarray, atol: float = 1e-12) -> np.ndarray:
        pts = np.asarray(real_points, dtype=float)
        return np.all((pts >= np.asarray(self.lo) - atol) & (pts <= np.asarray(self.hi) + atol), axis=-1)

    def describe(self) -> str:
        return f"BoxGrid(n={self.dim_complex}, counts={self.counts})"


# ---------------------------------------------------------------------------
# ScalarField
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: BoxGrid
    values: np.ndarray
    upper_bound: Optional[float] = None
    approximate: bool = False

    def __post_init__(self):
        vals = validate_ext_real(self.values, "field values").ravel()
        if vals.size != self.grid.size:
            raise InputError(f"field has {vals.size} values for {self.grid.size} nodes")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

        if self.upper_bound is not None:
            m = float(self.upper_bound)
            if not np.isfinite(m):
                raise InputError("upper_bound must be finite")
            finite = vals[np.isfinite(vals)]
            if finite.size and float(finite.max()) > m:
                raise InputError(f"value {float(finite.max())} exceeds upper_bound {m}")
            object.__setattr__(self, "upper_bound", m)

    @classmethod
    def constant(cls, grid: BoxGrid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.size, float(value)))

    @classmethod
    def neg_inf(cls, grid: BoxGrid) -> "ScalarField":
        return cls(grid, np.full(grid.size, NEG_INF))

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    @property
    def is_neg_inf(self) -> bool:
        """True when the field is identically NEG_INF."""
        return not bool(self.finite_mask.any())

    @property
    def max_value(self) -> float:
        return float(self.values.max())

    def derived_upper_bound(self) -> Optional[float]:
        if self.upper_bound is not None:
            return self.upper_bound
        return None if self.is_neg_inf else self.max_value

    def reshaped(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def with_values(self, values, upper_bound: Optional[float] = None) -> "ScalarField":
        return ScalarField(self.grid, values, upper_bound=upper_bound)

    def with_upper_bound(self, upper_bound: Optional[float] = None) -> "ScalarField":
        m = self.derived_upper_bound() if upper_bound is None else upper_bound
        return ScalarField(self.grid, self.values, upper_bound=m, approximate=self.approximate)

    def at(self, index: int) -> float:
        return float(self.values[int(index)])
