"""
Classical q-psh oracle.

On every (q+1)-dimensional complex slice, every ball in it and every
pluriharmonic polynomial p of the test family, u - p must not be larger
strictly inside the ball than on its boundary. The boundary of a
discretized ball is the band of slice nodes within one band width of the
sphere; the core is everything strictly inside the band.

PASS means no violation in the tested family, nothing more.
"""

import threading
from math import ceil
from typing import Optional, Sequence

import numpy as np

from mqpsh.core.config import settings
from mqpsh.core.errors import GridError, InputError
from mqpsh.core.logger import logger
from mqpsh.models.grid import BoxGrid, ScalarField, squared_norm, to_complex, to_real
from mqpsh.models.probe import PluriharmonicPoly, SliceSpec, default_poly_pool, slice_frames
from mqpsh.schemas.verdict import ClassicalWitness, PolySpec, QpshVerdict, _pairs
from mqpsh.services.field_service import field_service
from mqpsh.workers.pool import fan_out


def slice_steps(grid: BoxGrid, spec: SliceSpec) -> np.ndarray:
    """Real steps of the slice grid, matching FieldService.slice_lookup."""
    return field_service.slice_spacing(grid, spec)[0]


def band_width(steps: np.ndarray) -> float:
    return float(max(np.max(steps), 0.5 * np.sqrt(squared_norm(steps))))


def ball_masks(points: np.ndarray, radius: float, width: float) -> tuple[np.ndarray, np.ndarray]:
    """(core, band) masks of slice nodes for a ball centred at the slice origin."""
    dist = np.sqrt(squared_norm(points))
    core = dist < radius - width
    band = np.abs(dist - radius) <= width
    return core, band


class ClassicalService:

    def __init__(self, max_tol: float):
        self.max_tol = max_tol
        self._poly_cache: dict = {}
        self._lock = threading.Lock()

    # ---- slices ----

    def default_slices(
        self,
        grid: BoxGrid,
        q: int,
        radius: Optional[float] = None,
        region: Optional[np.ndarray] = None,
        stride: int = 1,
        rotated: bool = True,
    ) -> list[SliceSpec]:
        """
        Slices through grid nodes, one per frame of slice_frames and admissible
        base node. Coordinate frames come first; with `rotated`, frames mixing
        two coordinates follow (q+1 < n only). A base is admissible when the
        slice grid fits in the box and, if a region is given, every node the
        ball tests touch lies in the region.
        """
        n = grid.dim_complex
        m = q + 1
        if m > n:
            return []
        if stride < 1:
            raise InputError(f"stride must be >= 1, got {stride}")
        radius = 2.0 * float(grid.spacing.max()) if radius is None else float(radius)
        inside = None if region is None else np.asarray(region, dtype=bool).ravel()

        multi = grid.unravel(np.arange(grid.size))
        counts = np.asarray(grid.counts)
        points = grid.complex_points()
        out = []
        for frame in slice_frames(n, m, rotated):
            origin = SliceSpec(np.zeros(n), frame, radius)
            steps, on_nodes = field_service.slice_spacing(grid, origin)
            if not on_nodes:
                continue
            width = band_width(steps)
            half = [ceil((radius + width) / h - 1e-9) for h in steps]
            offsets = np.stack(np.meshgrid(*[np.arange(-h, h + 1) for h in half], indexing="ij"), axis=-1).reshape(-1, 2 * m)
            ambient = to_real(origin.to_ambient(to_complex(offsets * steps)))
            nodes = np.rint(ambient / grid.spacing).astype(np.intp)
            margin = np.abs(nodes).max(axis=0)

            ok = np.ones(grid.size, dtype=bool)
            for axis in np.flatnonzero(margin):
                ok &= (multi[:, axis] >= margin[axis]) & (multi[:, axis] <= counts[axis] - 1 - margin[axis])
                ok &= (multi[:, axis] - margin[axis]) % stride == 0

            if inside is not None:
                ok &= inside
                used = squared_norm(offsets * steps) <= (radius + width) ** 2 * (1 + 1e-12)
                shift = nodes[used] @ grid.strides
                bases = np.flatnonzero(ok)
                covered = np.all(inside[bases[:, None] + shift[None, :]], axis=1)
                ok[bases[~covered]] = False

            for base in np.flatnonzero(ok):
                out.append(SliceSpec(points[base], frame, radius))

        logger.debug("default_slices_built", q=q, radius=radius, slices=len(out))
        return out

    def default_polys(self, dim: int, seed: int = 0, random_count: int = 4) -> list[PluriharmonicPoly]:
        return default_poly_pool(dim, seed, random_count)

    # ---- oracle ----

    def _poly_matrix(self, slice_grid: BoxGrid, polys: Sequence[PluriharmonicPoly]) -> np.ndarray:
        key = (slice_grid, tuple((p.dim, p.terms, p.sign) for p in polys))
        with self._lock:
            cached = self._poly_cache.get(key)
        if cached is not None:
            return cached
        w = to_complex(slice_grid.points())
        matrix = np.stack([p.evaluate(w) for p in polys]) if polys else np.zeros((0, slice_grid.size))
        with self._lock:
            if len(self._poly_cache) > 64:
                self._poly_cache.clear()
            self._poly_cache[key] = matrix
        return matrix

    @staticmethod
    def _gradient_poly(slice_grid: BoxGrid, values: np.ndarray) -> Optional[PluriharmonicPoly]:
        """Linear Re(c w) matching the central-difference gradient at the slice origin."""
        centre = slice_grid.size // 2
        grad = np.empty(slice_grid.real_dim)
        with np.errstate(invalid="ignore"):
            for axis in range(slice_grid.real_dim):
                s = int(slice_grid.strides[axis])
                grad[axis] = (values[centre + s] - values[centre - s]) / (2.0 * slice_grid.spacing[axis])
        if not np.isfinite(grad).all():
            return None
        m = slice_grid.dim_complex
        return PluriharmonicPoly.linear(grad[:m] - 1j * grad[m:])

    def ball_test(self, u: ScalarField, spec: SliceSpec, radius: float, poly: PluriharmonicPoly) -> tuple[float, float]:
        """(core max, band max) of u - poly on one slice ball."""
        steps = slice_steps(u.grid, spec)
        width = band_width(steps)
        slice_grid, index, _ = field_service.slice_lookup(u.grid, spec, spec.ball_radius + width)
        g = u.values[index] - poly.evaluate(to_complex(slice_grid.points()))
        core, band = ball_masks(slice_grid.points(), radius, width)
        core_max = float(g[core].max()) if core.any() else float("-inf")
        band_max = float(g[band].max()) if band.any() else float("-inf")
        return core_max, band_max

    def classical_qpsh_oracle(
        self,
        u: ScalarField,
        q: int,
        slices: Optional[Sequence[SliceSpec]] = None,
        polys: Optional[Sequence[PluriharmonicPoly]] = None,
        balls_per_slice: int = 1,
        seed: int = 0,
        gradient_match: bool = True,
        slack: float = 0.0,
        atol: Optional[float] = None,
        region: Optional[np.ndarray] = None,
    ) -> QpshVerdict:
        n = u.grid.dim_complex
        if q < 0:
            raise InputError(f"q must be >= 0, got {q}")
        if q >= n:
            return QpshVerdict(status="PASS", checker="classical", q=q, note=f"q >= n = {n}: every u.s.c. function qualifies")
        if u.is_neg_inf:
            return QpshVerdict(status="PASS", checker="classical", q=q, note="u is identically NEG_INF")
        if balls_per_slice < 1:
            raise InputError("balls_per_slice must be >= 1")

        atol = self.max_tol if atol is None else float(atol)
        slices = self.default_slices(u.grid, q, region=region) if slices is None else list(slices)
        for s in slices:
            if s.dim != q + 1:
                raise GridError(f"slice of complex dimension {s.dim} used at level q={q}")
        pool = self.default_polys(q + 1, seed) if polys is None else list(polys)

        def run(item):
            s_idx, spec = item
            steps = slice_steps(u.grid, spec)
            width = band_width(steps)
            slice_grid, index, _ = field_service.slice_lookup(u.grid, spec, spec.ball_radius + width)
            values = u.values[index]
            family = list(pool)
            if gradient_match:
                grad = self._gradient_poly(slice_grid, values)
                if grad is not None:
                    family.append(grad)
            P = self._poly_matrix(slice_grid, pool)
            if len(family) > len(pool):
                P = np.vstack([P, family[-1].evaluate(to_complex(slice_grid.points()))[None, :]])

            G = values[None, :] - P
            tested = 0
            for r_idx, radius in enumerate(spec.ball_radius * np.linspace(1.0, 0.5, balls_per_slice)):
                core, band = ball_masks(slice_grid.points(), radius, width)
                if not core.any() or not band.any():
                    continue
                core_max = G[:, core].max(axis=1)
                band_max = G[:, band].max(axis=1)
                tested += G.shape[0]
                bad = np.flatnonzero(core_max > band_max + atol + slack)
                if bad.size:
                    p_idx = int(bad[0])
                    return (s_idx, r_idx, p_idx, float(radius), family[p_idx], float(core_max[p_idx]), float(band_max[p_idx])), tested
            return None, tested

        results = fan_out(run, list(enumerate(slices)))
        checked = sum(t for _, t in results)
        failures = [f for f, _ in results if f is not None]
        if not failures:
            logger.info("checker_pass", checker="classical", q=q, slices=len(slices), checked=checked)
            return QpshVerdict(status="PASS", checker="classical", q=q, checked=checked)

        s_idx, _, _, radius, poly, core_max, band_max = min(failures, key=lambda f: f[:3])
        spec = slices[s_idx]
        witness = ClassicalWitness(
            slice_index=s_idx,
            base=_pairs(spec.base),
            frame=_pairs(spec.frame),
            ball_radius=radius,
            poly=PolySpec.from_poly(poly),
            core_max=core_max,
            band_max=band_max,
        )
        logger.warning("checker_fail", checker="classical", q=q, slice=s_idx, gap=witness.gap)
        return QpshVerdict(status="FAIL", checker="classical", q=q, witness=witness, checked=checked)


classical_service = ClassicalService(max_tol=settings.MAX_TOL)
