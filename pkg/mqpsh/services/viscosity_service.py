"""
Viscosity falsifier.

Every probe phi of a finite family is centred at every candidate node c and
u - phi is maximized over the cube window of `window` nodes around c. A
touch is a strict interior maximum of that window: the maximizer is off the
window boundary and beats the boundary by more than MAX_TOL. A touch where
H^C phi has more than q negative eigenvalues falsifies q-psh.

H^C phi = U diag(d) U* is known from the probe itself, so only the window
maximization is numerical.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from mqpsh.core.config import settings
from mqpsh.core.errors import InputError
from mqpsh.core.logger import logger
from mqpsh.models.grid import BoxGrid, ScalarField, to_complex
from mqpsh.models.matrix import InertiaSignature
from mqpsh.models.probe import Probe, ProbeFamily
from mqpsh.schemas.report import PositiveInertiaReport
from mqpsh.schemas.verdict import ProbeSpec, QpshVerdict, TouchPoint, ViscosityWitness
from mqpsh.services.hermitian_service import hermitian_service
from mqpsh.workers.pool import fan_out

DEFAULT_WINDOW = 2
CENTRE_CHUNK = 512


@dataclass(frozen=True, eq=False)
class Touches:
    """Strict interior window maxima, one row per (centre, probe) pair that touched."""

    centre: np.ndarray
    probe: np.ndarray
    point: np.ndarray
    gap: np.ndarray

    @property
    def count(self) -> int:
        return int(self.centre.size)

    def order(self) -> np.ndarray:
        """Lexicographic order on (centre, probe)."""
        return np.lexsort((self.probe, self.centre))


def window_offsets(grid: BoxGrid, window: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(real offsets, linear shifts, on-boundary flags) of the cube window."""
    d = grid.real_dim
    ranges = [np.arange(-window, window + 1)] * d
    multi = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, d)
    shift = multi @ grid.strides
    edge = np.any(np.abs(multi) == window, axis=1)
    return multi * grid.spacing, shift, edge


class ViscosityService:

    def __init__(self, max_tol: float):
        self.max_tol = max_tol

    def centres(self, grid: BoxGrid, window: int = DEFAULT_WINDOW, region: Optional[np.ndarray] = None, stride: int = 1) -> np.ndarray:
        """Nodes whose whole window lies in the box (and in the region, if given)."""
        if window < 1:
            raise InputError(f"window must be >= 1, got {window}")
        if stride < 1:
            raise InputError(f"centre stride must be >= 1, got {stride}")
        ok = grid.margin_mask(window)
        if region is not None:
            inside = np.asarray(region, dtype=bool).reshape(grid.shape)
            cube = ndimage.generate_binary_structure(grid.real_dim, grid.real_dim)
            ok &= ndimage.binary_erosion(inside, structure=cube, iterations=window, border_value=0).ravel()
        if stride > 1:
            multi = grid.unravel(np.arange(grid.size))
            ok &= np.all((multi - window) % stride == 0, axis=1)
        return np.flatnonzero(ok)

    def probe_touches(
        self,
        u: ScalarField,
        probes: list[Probe],
        window: int = DEFAULT_WINDOW,
        region: Optional[np.ndarray] = None,
        center_stride: int = 1,
    ) -> Touches:
        grid = u.grid
        centres = self.centres(grid, window, region, center_stride)
        offsets, shift, edge = window_offsets(grid, window)
        w = to_complex(offsets)
        P = np.stack([p.evaluate(w) for p in probes]) if probes else np.zeros((0, shift.size))
        inner = ~edge
        tol = self.max_tol

        def run(chunk: np.ndarray):
            U = u.values[chunk[:, None] + shift[None, :]]
            rows = np.arange(chunk.size)
            found = []
            for k in range(P.shape[0]):
                G = U - P[k][None, :]
                arg = np.argmax(G, axis=1)
                gmax = G[rows, arg]
                edge_max = G[:, edge].max(axis=1)
                with np.errstate(invalid="ignore"):
                    gap = gmax - edge_max
                strict = inner[arg] & np.isfinite(gmax) & (gap > tol)
                for r in np.flatnonzero(strict):
                    found.append((int(chunk[r]), k, int(chunk[r] + shift[arg[r]]), float(gap[r])))
            return found

        chunks = [centres[s:s + CENTRE_CHUNK] for s in range(0, centres.size, CENTRE_CHUNK)]
        rows = [row for part in fan_out(run, chunks) for row in part]
        arr = np.array(rows, dtype=float).reshape(-1, 4)
        touches = Touches(
            centre=arr[:, 0].astype(np.intp),
            probe=arr[:, 1].astype(np.intp),
            point=arr[:, 2].astype(np.intp),
            gap=arr[:, 3],
        )
        logger.info("probe_touches_found", centres=int(centres.size), probes=len(probes), touches=touches.count)
        return touches

    @staticmethod
    def probe_inertia(probes: list[Probe]) -> list[InertiaSignature]:
        cache: dict = {}
        out = []
        for p in probes:
            key = (p.frame.tobytes(), p.curvatures.tobytes())
            if key not in cache:
                cache[key] = hermitian_service.inertia(p.hessian)
            out.append(cache[key])
        return out

    def _touch_points(self, touches: Touches, probes: list[Probe], inertia: list[InertiaSignature], rows: np.ndarray) -> list[TouchPoint]:
        return [
            TouchPoint(
                centre_index=int(touches.centre[i]),
                point_index=int(touches.point[i]),
                probe_label=probes[touches.probe[i]].label,
                negative=inertia[touches.probe[i]].negative,
                positive=inertia[touches.probe[i]].positive,
            )
            for i in rows
        ]

    def viscosity_falsifier(
        self,
        u: ScalarField,
        q: int,
        probes: Optional[ProbeFamily] = None,
        window: int = DEFAULT_WINDOW,
        region: Optional[np.ndarray] = None,
        center_stride: int = 1,
        seed: int = 0,
        record_touches: bool = False,
    ) -> QpshVerdict:
        n = u.grid.dim_complex
        if q < 0:
            raise InputError(f"q must be >= 0, got {q}")
        if q >= n:
            return QpshVerdict(status="PASS", checker="viscosity", q=q, note=f"q >= n = {n}: every u.s.c. function qualifies")
        if u.is_neg_inf:
            return QpshVerdict(status="PASS", checker="viscosity", q=q, note="u is identically NEG_INF")

        family = ProbeFamily.default(n, seed) if probes is None else probes
        probe_list = family.probes()
        touches = self.probe_touches(u, probe_list, window, region, center_stride)
        return self.verdict_from_touches(u, q, probe_list, touches, window, record_touches)

    def verdict_from_touches(
        self,
        u: ScalarField,
        q: int,
        probe_list: list[Probe],
        touches: Touches,
        window: int = DEFAULT_WINDOW,
        record_touches: bool = False,
    ) -> QpshVerdict:
        inertia = self.probe_inertia(probe_list)
        order = touches.order()
        negative = np.array([s.negative for s in inertia], dtype=int)
        bad = [i for i in order if negative[touches.probe[i]] > q]
        recorded = self._touch_points(touches, probe_list, inertia, order) if record_touches else []

        if not bad:
            logger.info("checker_pass", checker="viscosity", q=q, touches=touches.count)
            return QpshVerdict(status="PASS", checker="viscosity", q=q, checked=touches.count, touch_points=recorded)

        i = bad[0]
        probe = probe_list[touches.probe[i]]
        witness = ViscosityWitness(
            probe=ProbeSpec.from_probe(probe),
            centre_index=int(touches.centre[i]),
            point_index=int(touches.point[i]),
            point=u.grid.coords(touches.point[i]).tolist(),
            inertia=inertia[touches.probe[i]],
            gap=float(touches.gap[i]),
        )
        logger.warning("checker_fail", checker="viscosity", q=q, probe=probe.label, node=witness.point_index)
        return QpshVerdict(
            status="FAIL",
            checker="viscosity",
            q=q,
            witness=witness,
            checked=touches.count,
            touch_points=recorded,
            note=f"window={window}",
        )

    def strict_positive_inertia_check(
        self,
        u: ScalarField,
        q: int,
        probes: Optional[ProbeFamily] = None,
        window: int = DEFAULT_WINDOW,
        region: Optional[np.ndarray] = None,
        center_stride: int = 1,
        seed: int = 0,
    ) -> PositiveInertiaReport:
        """At every touch of a strictly q-psh field, H^C phi has at least n - q positive eigenvalues."""
        n = u.grid.dim_complex
        if u.is_neg_inf:
            return PositiveInertiaReport(q=q, touches=0, violations=0)
        family = ProbeFamily.default(n, seed) if probes is None else probes
        probe_list = family.probes()
        touches = self.probe_touches(u, probe_list, window, region, center_stride)
        inertia = self.probe_inertia(probe_list)
        bad = [i for i in touches.order() if inertia[touches.probe[i]].positive < n - q]
        first = self._touch_points(touches, probe_list, inertia, bad[:1])
        if bad:
            logger.warning("positive_inertia_violation", q=q, count=len(bad))
        return PositiveInertiaReport(
            q=q,
            touches=touches.count,
            violations=len(bad),
            first_violation=first[0] if first else None,
        )

    def replay(self, u: ScalarField, q: int, witness: ViscosityWitness, window: int = DEFAULT_WINDOW) -> bool:
        """Recompute the witness window: same maximizer, still strict, still too many negative directions."""
        grid = u.grid
        probe = witness.probe.to_probe()
        offsets, shift, edge = window_offsets(grid, window)
        centre = witness.centre_index
        if not grid.margin_mask(window)[centre]:
            return False
        G = u.values[centre + shift] - probe.evaluate(to_complex(offsets))
        arg = int(np.argmax(G))
        gap = float(G[arg] - G[edge].max())
        inertia = hermitian_service.inertia(probe.hessian)
        return (
            not edge[arg]
            and int(centre + shift[arg]) == witness.point_index
            and gap > self.max_tol
            and abs(gap - witness.gap) <= 1e-9 * (1.0 + abs(witness.gap))
            and inertia.negative > q
        )


viscosity_service = ViscosityService(max_tol=settings.MAX_TOL)
