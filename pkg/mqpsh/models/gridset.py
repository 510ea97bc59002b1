from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mqpsh.core.errors import GridError, InputError
from mqpsh.models.grid import BoxGrid, squared_norm


@dataclass(frozen=True, eq=False)
class GridSet:
    """A closed set X on a grid, given by a membership mask in node order."""

    grid: BoxGrid
    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask)
        if mask.dtype != bool:
            if not np.isin(mask, (0, 1)).all():
                raise InputError("mask entries must be 0 or 1")
            mask = mask.astype(bool)
        mask = mask.ravel().copy()
        if mask.size != self.grid.size:
            raise GridError(f"mask has {mask.size} entries for {self.grid.size} nodes")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def full(cls, grid: BoxGrid) -> "GridSet":
        return cls(grid, np.ones(grid.size, dtype=bool))

    @classmethod
    def empty(cls, grid: BoxGrid) -> "GridSet":
        return cls(grid, np.zeros(grid.size, dtype=bool))

    @classmethod
    def from_indices(cls, grid: BoxGrid, indices) -> "GridSet":
        mask = np.zeros(grid.size, dtype=bool)
        mask[np.asarray(indices, dtype=np.intp)] = True
        return cls(grid, mask)

    @classmethod
    def ball(cls, grid: BoxGrid, center, radius: float) -> "GridSet":
        d2 = squared_norm(grid.points() - np.asarray(center, dtype=float))
        return cls(grid, d2 <= radius * radius * (1 + 1e-12))

    @classmethod
    def slab(cls, grid: BoxGrid, axes, half_width: float) -> "GridSet":
        """Nodes with |coordinate| <= half_width on every listed real axis."""
        pts = grid.points()
        mask = np.all(np.abs(pts[:, list(axes)]) <= half_width + 1e-12, axis=-1)
        return cls(grid, mask)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))

    @property
    def is_empty(self) -> bool:
        return self.count == 0

    def complement(self) -> "GridSet":
        return GridSet(self.grid, ~self.mask)

    def issubset(self, other: "GridSet") -> bool:
        return bool(np.all(~self.mask | other.mask))
