"""
Operations on grid-sampled extended-real fields:
- sampling pointwise functions
- restriction to complex affine slices
- discrete upper regularization of a supremum
- maximum principle and monotone limits
- the cone/lattice operations (scale, max, sum, min)
"""

from math import ceil
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage

from mqpsh.core.config import settings
from mqpsh.core.errors import GridError, InputError
from mqpsh.core.logger import logger
from mqpsh.models.grid import (
    BoxGrid,
    ScalarField,
    ext_max,
    ext_min,
    ext_scale,
    to_complex,
    to_real,
    validate_ext_real,
)
from mqpsh.models.probe import SliceSpec
from mqpsh.schemas.report import MaximumPrincipleReport

PointwiseFn = Callable[[np.ndarray], np.ndarray]


def require_same_grid(fields: Sequence[ScalarField]) -> BoxGrid:
    if not fields:
        raise InputError("empty collection of fields")
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise GridError(f"grid mismatch: {f.grid.describe()} vs {grid.describe()}")
    return grid


class FieldService:

    def sample(self, f: PointwiseFn, grid: BoxGrid) -> ScalarField:
        raw = f(grid.complex_points())
        values = validate_ext_real(raw, "sampled values")
        if values.shape != (grid.size,):
            raise InputError(f"function returned shape {values.shape}, expected ({grid.size},)")
        return ScalarField(grid, values)

    # ---- slices ----

    def slice_spacing(self, grid: BoxGrid, spec: SliceSpec) -> tuple[np.ndarray, bool]:
        """
        Real steps of the slice grid (real parts first) and whether every
        slice node lands on a parent node.

        A frame column whose k nonzero entries are (+-1 or +-i)/sqrt(k) moves
        k parent axes by one node per slice step h*sqrt(k), provided those
        axes share the spacing h. Coordinate columns keep their own x and y
        spacings. Any other frame falls back to the smallest parent spacing.
        """
        n = grid.dim_complex
        m = spec.dim
        re_steps, im_steps = [], []
        for col in range(m):
            column = spec.frame[:, col]
            support = np.flatnonzero(np.abs(column) > 1e-12)
            k = support.size
            unit = column[support] * np.sqrt(k)
            real = (np.abs(unit.imag) < 1e-12) & (np.abs(np.abs(unit.real) - 1) < 1e-12)
            imag = (np.abs(unit.real) < 1e-12) & (np.abs(np.abs(unit.imag) - 1) < 1e-12)
            if not np.all(real | imag):
                return np.full(2 * m, float(grid.spacing.min())), False
            h_re = grid.spacing[np.where(real, support, support + n)]
            h_im = grid.spacing[np.where(real, support + n, support)]
            if k > 1 and np.ptp(np.concatenate([h_re, h_im])) > 1e-12 * float(h_re.max()):
                return np.full(2 * m, float(grid.spacing.min())), False
            re_steps.append(float(h_re[0]) * np.sqrt(k))
            im_steps.append(float(h_im[0]) * np.sqrt(k))
        return np.array(re_steps + im_steps), True

    def slice_lookup(self, grid: BoxGrid, spec: SliceSpec, extent: Optional[float] = None) -> tuple[BoxGrid, np.ndarray, bool]:
        """
        Slice grid around the slice base plus the parent node of every slice node.

        Steps come from slice_spacing; lookups are exact for coordinate and
        two-coordinate diagonal frames through a node, nearest-node otherwise.
        """
        if spec.n != grid.dim_complex:
            raise GridError(f"slice lives in C^{spec.n}, grid in C^{grid.dim_complex}")
        m = spec.dim
        extent = spec.ball_radius + float(grid.spacing.max()) if extent is None else float(extent)

        steps, on_nodes = self.slice_spacing(grid, spec)
        half = np.array([ceil(extent / h - 1e-9) for h in steps], dtype=int)
        slice_grid = BoxGrid(m, tuple(-half * steps), tuple(half * steps), tuple(2 * half + 1))

        w = to_complex(slice_grid.points())
        ambient = to_real(spec.to_ambient(w))
        try:
            index, err = grid.nearest_index(ambient, strict=True)
        except GridError as exc:
            raise GridError(f"slice leaves the parent box: {exc}") from exc
        approximate = not on_nodes or bool(np.max(err) > 1e-6)
        return slice_grid, index, approximate

    def restrict_to_slice(self, field: ScalarField, spec: SliceSpec, extent: Optional[float] = None) -> ScalarField:
        slice_grid, index, approximate = self.slice_lookup(field.grid, spec, extent)
        return ScalarField(slice_grid, field.values[index], approximate=approximate)

    # ---- regularization ----

    def usc_sup_star(self, fields: Sequence[ScalarField]) -> ScalarField:
        """Pointwise sup, then max over each node and its axis neighbours."""
        grid = require_same_grid(list(fields))
        sup = ext_max(*[f.values for f in fields])
        footprint = ndimage.generate_binary_structure(grid.real_dim, 1)
        regularized = ndimage.maximum_filter(sup.reshape(grid.shape), footprint=footprint, mode="nearest")
        return ScalarField(grid, regularized.ravel())

    def maximum_principle_check(self, u: ScalarField, region: Optional[np.ndarray] = None, tol: Optional[float] = None) -> MaximumPrincipleReport:
        """Max over the closed region against max over its boundary layer."""
        tol = settings.MAX_TOL if tol is None else tol
        grid = u.grid
        inside = np.ones(grid.size, dtype=bool) if region is None else np.asarray(region, dtype=bool).ravel()
        footprint = ndimage.generate_binary_structure(grid.real_dim, 1)
        core = ndimage.binary_erosion(inside.reshape(grid.shape), structure=footprint, border_value=0).ravel()
        layer = inside & ~core
        interior_max = float(u.values[core].max()) if core.any() else float("-inf")
        boundary_max = float(u.values[layer].max()) if layer.any() else float("-inf")
        return MaximumPrincipleReport(interior_max=interior_max, boundary_max=boundary_max, tol=tol)

    def monotone_limit(self, fields: Sequence[ScalarField]) -> ScalarField:
        """Pointwise limit of a nonincreasing sequence."""
        grid = require_same_grid(list(fields))
        for k in range(1, len(fields)):
            up = fields[k].values > fields[k - 1].values
            if up.any():
                node = int(np.flatnonzero(up)[0])
                raise InputError(f"sequence increases at step {k}, node {node}")
        return ScalarField(grid, ext_min(*[f.values for f in fields]))

    # ---- lattice ----

    def scale_field(self, c: float, u: ScalarField) -> ScalarField:
        return ScalarField(u.grid, ext_scale(c, u.values))

    def max_fields(self, *fields: ScalarField) -> ScalarField:
        grid = require_same_grid(fields)
        return ScalarField(grid, ext_max(*[f.values for f in fields]))

    def min_fields(self, *fields: ScalarField) -> ScalarField:
        grid = require_same_grid(fields)
        return ScalarField(grid, ext_min(*[f.values for f in fields]))

    def sum_fields(self, *fields: ScalarField) -> ScalarField:
        grid = require_same_grid(fields)
        total = fields[0].values
        for f in fields[1:]:
            total = total + f.values
        return ScalarField(grid, total)

    def add_function(self, u: ScalarField, f: PointwiseFn, sign: float = 1.0) -> ScalarField:
        """u + sign * f for a finite pointwise f."""
        g = np.asarray(f(u.grid.complex_points()), dtype=float)
        if not np.isfinite(g).all():
            raise InputError("added function must be finite on the grid")
        logger.debug("field_shifted", nodes=u.grid.size, sign=sign)
        return ScalarField(u.grid, u.values + sign * g)


field_service = FieldService()
