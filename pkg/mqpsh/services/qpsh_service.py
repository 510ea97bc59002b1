"""
q-psh checkers built on top of the three engines:

- smooth_qpsh_index: largest number of negative complex-Hessian eigenvalues over the grid
- checker_agreement: smooth / classical / viscosity verdicts side by side
- strict_qpsh_check: u - eps |. - y|^2 on balls B(y)
- magic_property_harness and strict_preservation_harness: sup-convolution keeps (strict) q-psh on W
- replay_witness
"""

from typing import Callable, Optional, Sequence

import numpy as np

from mqpsh.core.config import settings
from mqpsh.core.errors import GridError, InputError, NonSmoothPointError, PreconditionError
from mqpsh.core.logger import logger
from mqpsh.models.grid import BoxGrid, ScalarField, ext_add, squared_norm
from mqpsh.models.gridset import GridSet
from mqpsh.models.kernel import Kernel
from mqpsh.models.matrix import HermitianMatrix
from mqpsh.models.probe import ProbeFamily, SliceSpec
from mqpsh.models.stencil import Stencil
from mqpsh.schemas.report import (
    AgreementReport,
    MagicPropertyReport,
    SmoothIndexReport,
    StrictNode,
    StrictPreservationReport,
    StrictReport,
)
from mqpsh.schemas.verdict import ClassicalWitness, QpshVerdict, ViscosityWitness, _from_pairs
from mqpsh.services.classical_service import classical_service
from mqpsh.services.envelope_service import envelope_service
from mqpsh.services.field_service import field_service
from mqpsh.services.hermitian_service import hermitian_service
from mqpsh.services.hessian_service import hessian_service
from mqpsh.services.viscosity_service import DEFAULT_WINDOW, viscosity_service

PointwiseFn = Callable[[np.ndarray], np.ndarray]

FD_INERTIA_SCALE = 1e-6
HESSIAN_CHUNK = 1024
DEEP_REACH = 3


class QpshService:

    # ---- smooth ----

    def smooth_qpsh_index(
        self,
        f: PointwiseFn,
        grid: BoxGrid,
        stencil: Optional[Stencil] = None,
        tol: Optional[float] = None,
        region: Optional[np.ndarray] = None,
    ) -> SmoothIndexReport:
        """
        q* = max over interior nodes of the number of negative eigenvalues of H^C f.

        Finite differences carry O(h^2) noise, so the default zero threshold
        is FD_INERTIA_SCALE * max(1, |H|_F) per node.
        """
        mask = grid.interior_mask.copy()
        if region is not None:
            mask &= np.asarray(region, dtype=bool).ravel()
        nodes = np.flatnonzero(mask)
        z = grid.complex_points()

        negatives = np.empty(nodes.size, dtype=int)
        for start in range(0, nodes.size, HESSIAN_CHUNK):
            block = nodes[start:start + HESSIAN_CHUNK]
            try:
                H = hessian_service.complex_hessians(f, z[block], stencil)
            except NonSmoothPointError as exc:
                if exc.node is None:
                    raise
                raise exc.at_node(int(block[exc.node])) from exc
            for k in range(block.size):
                A = HermitianMatrix(H[k])
                t = FD_INERTIA_SCALE * max(1.0, A.frobenius_norm) if tol is None else tol
                negatives[start + k] = hermitian_service.inertia(A, t).negative

        q_star = int(negatives.max(initial=0))
        worst = nodes[negatives == q_star] if nodes.size else nodes
        logger.info("smooth_index_computed", nodes=int(nodes.size), q_star=q_star)
        return SmoothIndexReport(
            q_star=q_star,
            worst_nodes=worst.tolist(),
            worst_points=grid.points()[worst].tolist(),
            checked=int(nodes.size),
        )

    @staticmethod
    def smooth_verdict(report: SmoothIndexReport, q: int) -> QpshVerdict:
        status = "PASS" if report.q_star <= q else "FAIL"
        return QpshVerdict(status=status, checker="smooth", q=q, checked=report.checked, note=f"q*={report.q_star}")

    # ---- agreement ----

    def checker_agreement(
        self,
        q: int,
        u: Optional[ScalarField] = None,
        f: Optional[PointwiseFn] = None,
        grid: Optional[BoxGrid] = None,
        smooth: bool = True,
        probes: Optional[ProbeFamily] = None,
        seed: int = 0,
    ) -> AgreementReport:
        if u is None:
            if f is None or grid is None:
                raise InputError("checker_agreement needs a field, or a function and a grid")
            u = field_service.sample(f, grid)
        n = u.grid.dim_complex

        verdicts = {
            "classical": classical_service.classical_qpsh_oracle(u, q, seed=seed),
            "viscosity": viscosity_service.viscosity_falsifier(u, q, probes, seed=seed),
        }
        note = None
        if f is not None and smooth:
            if q >= n or u.is_neg_inf:
                verdicts["smooth"] = QpshVerdict(status="PASS", checker="smooth", q=q)
            else:
                try:
                    verdicts["smooth"] = self.smooth_verdict(self.smooth_qpsh_index(f, u.grid), q)
                except NonSmoothPointError as exc:
                    note = f"smooth checker skipped: {exc}"

        statuses = {k: v.status for k, v in verdicts.items()}
        agree = len(set(statuses.values())) == 1
        if not agree:
            logger.error("checker_disagreement", q=q, verdicts=statuses)
        return AgreementReport(q=q, verdicts=statuses, agree=agree, note=note)

    # ---- strictness ----

    @staticmethod
    def ball_nodes(grid: BoxGrid, ball_radius: float) -> np.ndarray:
        pts = grid.points()
        lo = np.asarray(grid.lo) + ball_radius - 1e-12
        hi = np.asarray(grid.hi) - ball_radius + 1e-12
        return np.flatnonzero(np.all((pts >= lo) & (pts <= hi), axis=1))

    def strict_qpsh_check(
        self,
        u: ScalarField,
        q: int,
        epsilons: Sequence[float],
        ball_radius: float,
        sub_radius: Optional[float] = None,
        nodes: Optional[Sequence[int]] = None,
        balls_per_slice: int = 1,
        seed: int = 0,
    ) -> StrictReport:
        """
        A node y passes when, for some eps of the list, u - eps |. - y|^2
        passes the classical oracle on slices inside B(y). Epsilons are tried
        from largest to smallest; the first pass is the reported best.
        """
        eps = sorted({float(e) for e in epsilons}, reverse=True)
        if not eps or eps[-1] <= 0:
            raise InputError("epsilons must be a non-empty list of positive numbers")
        if not ball_radius > 0:
            raise InputError(f"ball_radius must be > 0, got {ball_radius}")
        grid = u.grid
        fits = self.ball_nodes(grid, ball_radius)
        if nodes is None:
            nodes = fits
        else:
            nodes = np.asarray(nodes, dtype=np.intp)
            outside = np.setdiff1d(nodes, fits)
            if outside.size:
                raise GridError(f"ball of radius {ball_radius} around node {int(outside[0])} leaves the grid box")

        pts = grid.points()
        results = []
        for node in nodes:
            y = pts[node]
            if q >= grid.dim_complex or u.is_neg_inf:
                results.append(StrictNode(node=int(node), passed=True, best_epsilon=eps[0]))
                continue
            ball = GridSet.ball(grid, y, ball_radius).mask
            slices = classical_service.default_slices(grid, q, radius=sub_radius, region=ball)
            if not slices:
                raise GridError(f"no slice ball fits inside B(y) of radius {ball_radius}; lower sub_radius")
            bump = squared_norm(pts - y)
            best = None
            for e in eps:
                v = ScalarField(grid, ext_add(u.values, -e * bump))
                verdict = classical_service.classical_qpsh_oracle(v, q, slices=slices, balls_per_slice=balls_per_slice, seed=seed)
                if verdict.passed:
                    best = e
                    break
            results.append(StrictNode(node=int(node), passed=best is not None, best_epsilon=best))

        report = StrictReport(q=q, epsilons=eps, nodes=results)
        logger.info("strict_check_done", q=q, nodes=len(results), failed=report.failed_count)
        return report

    # ---- sup-convolution harnesses ----

    def magic_property_harness(
        self,
        u: ScalarField,
        q: int,
        kernel: Kernel,
        A: Optional[HermitianMatrix] = None,
        G: Optional[HermitianMatrix] = None,
        H: Optional[HermitianMatrix] = None,
        probes: Optional[ProbeFamily] = None,
        reach: int = DEEP_REACH,
        seed: int = 0,
    ) -> tuple[MagicPropertyReport, Optional[ScalarField]]:
        """
        F = [u + g]^Phi - h with g(y) = y^T G conj(y), h(y) = y^T H conj(y)
        and G >= A >= H, checked for q-psh on W. Returns the report and F.

        W is the proper interior with `reach` nodes of room on both the
        query and the maximizer side.
        """
        grid = u.grid
        n = grid.dim_complex
        zero = HermitianMatrix.zeros(n)
        A = zero if A is None else A
        G = A if G is None else G
        H = A if H is None else H
        if kernel.semiconvex_delta is None:
            raise PreconditionError("magic_property_harness needs a kernel with a known semiconvexity constant")
        if not hermitian_service.loewner_geq(G, A):
            raise PreconditionError("G >= A does not hold in the Loewner order")
        if not hermitian_service.loewner_geq(A, H):
            raise PreconditionError("A >= H does not hold in the Loewner order")

        if u.is_neg_inf:
            return MagicPropertyReport(q=q, w_size=0, vacuous=True, note="u is identically NEG_INF, so F is too"), None

        z = grid.complex_points()
        g = G.form(z)
        h = H.form(z)
        lifted = ScalarField(grid, ext_add(u.values, g))
        result = envelope_service.envelope(lifted, kernel)
        F = ScalarField(grid, result.values.values - h)
        W = result.deep_mask(reach)
        if not W.any():
            return MagicPropertyReport(q=q, w_size=0, vacuous=True, note="W is empty"), F

        classical = classical_service.classical_qpsh_oracle(F, q, region=W, seed=seed)
        viscosity = viscosity_service.viscosity_falsifier(F, q, probes, region=W, seed=seed)
        finite = bool(np.isfinite(F.values[W]).all()) if G.allclose(H) else None
        report = MagicPropertyReport(
            q=q,
            w_size=int(W.sum()),
            vacuous=False,
            classical=classical,
            viscosity=viscosity,
            finite_on_w=finite,
        )
        logger.info("magic_property_checked", q=q, w_size=report.w_size, passed=report.passed)
        return report, F

    def strict_preservation_harness(
        self,
        u: ScalarField,
        q: int,
        kernel: Kernel,
        epsilons: Sequence[float],
        ball_radius: float,
        sub_radius: Optional[float] = None,
        reach: int = DEEP_REACH,
        max_nodes: int = 9,
    ) -> StrictPreservationReport:
        """The sup-convolution of a strictly q-psh field is strictly q-psh on W."""
        result = envelope_service.envelope(u, kernel)
        W = result.deep_mask(reach)
        grid = u.grid
        pts = grid.points()
        candidates = [
            int(node) for node in self.ball_nodes(grid, ball_radius)
            if W[node] and W[GridSet.ball(grid, pts[node], ball_radius).mask].all()
        ]
        if not candidates:
            return StrictPreservationReport(q=q, w_size=int(W.sum()), note="no ball fits inside W")
        picks = np.unique(np.linspace(0, len(candidates) - 1, min(max_nodes, len(candidates))).round().astype(int))
        nodes = [candidates[i] for i in picks]
        strict = self.strict_qpsh_check(result.values, q, epsilons, ball_radius, sub_radius, nodes=nodes)
        return StrictPreservationReport(q=q, w_size=int(W.sum()), strict=strict)

    # ---- replay ----

    def replay_witness(self, u: ScalarField, verdict: QpshVerdict, window: int = DEFAULT_WINDOW) -> bool:
        """Recompute a FAIL witness from scratch; True when it reproduces."""
        witness = verdict.witness
        if witness is None:
            raise InputError("verdict carries no witness to replay")
        if isinstance(witness, ViscosityWitness):
            ok = viscosity_service.replay(u, verdict.q, witness, window)
        else:
            ok = self._replay_classical(u, witness)
        logger.info("witness_replayed", checker=verdict.checker, reproduced=ok)
        return ok

    @staticmethod
    def _replay_classical(u: ScalarField, witness: ClassicalWitness) -> bool:
        spec = SliceSpec(_from_pairs(witness.base), _from_pairs(witness.frame), witness.ball_radius)
        core_max, band_max = classical_service.ball_test(u, spec, witness.ball_radius, witness.poly.to_poly())
        same = abs(core_max - witness.core_max) <= 1e-9 * (1 + abs(witness.core_max))
        return same and core_max > band_max + settings.MAX_TOL


qpsh_service = QpshService()
