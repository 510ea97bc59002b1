"""
Closed sets on grids.

The distance transform is the quadratic sup-convolution of the
characteristic function with theta = 1: -dist_X^2 = chi^Phi for
Phi = -|.|^2, so it reuses the separable lower-envelope pass and the exact
recomputation of the engine.
"""

from typing import Callable, Optional

import numpy as np

from mqpsh.core.errors import InputError, KernelError
from mqpsh.core.logger import logger
from mqpsh.models.grid import NEG_INF, ScalarField, squared_norm, validate_ext_real
from mqpsh.models.gridset import GridSet
from mqpsh.models.kernel import LADDER_MAX, LADDER_POINTS, Kernel, check_nonincreasing
from mqpsh.schemas.report import EquivalenceReport, IdentityReport, ScalingResult
from mqpsh.services.classical_service import classical_service
from mqpsh.services.envelope_service import envelope_service
from mqpsh.services.field_service import field_service
from mqpsh.workers.pool import fan_out

Profile = Callable[[np.ndarray], np.ndarray]

IDENTITY_TOL = 1e-12
SCALING_KS = (1.0, 2.0, 4.0, 8.0)


class SetGeomService:

    def __init__(self, chunk: int = 256):
        self.chunk = chunk

    def char_function(self, X: GridSet) -> ScalarField:
        values = np.where(X.mask, 0.0, NEG_INF)
        return ScalarField(X.grid, values, upper_bound=0.0)

    def distance_transform(self, X: GridSet) -> ScalarField:
        if X.is_empty:
            raise InputError("distance to an empty set is undefined")
        result = envelope_service.moreau_envelope_fast(self.char_function(X), 1.0)
        dist = np.sqrt(-result.values.values) + 0.0
        logger.info("distance_transform_computed", nodes=X.grid.size, members=X.count)
        return ScalarField(X.grid, dist)

    def brute_force_distance(self, X: GridSet) -> ScalarField:
        """O(N * |X|) reference."""
        if X.is_empty:
            raise InputError("distance to an empty set is undefined")
        pts = X.grid.points()
        members = pts[X.mask]

        def run(bounds):
            start, stop = bounds
            return squared_norm(pts[start:stop, None, :] - members[None, :, :]).min(axis=1)

        bounds = [(s, min(s + self.chunk, X.grid.size)) for s in range(0, X.grid.size, self.chunk)]
        d2 = np.concatenate(fan_out(run, bounds))
        return ScalarField(X.grid, np.sqrt(d2) + 0.0)

    @staticmethod
    def check_profile(f: Profile):
        """f nonincreasing, f(0) = 0 and f(t) < 0 for t > 0, on the sample ladder."""
        check_nonincreasing(f)
        ladder = np.linspace(0.0, LADDER_MAX, LADDER_POINTS)
        values = validate_ext_real(f(ladder), "profile samples")
        if values[0] != 0.0:
            raise KernelError(f"profile must vanish at 0, got f(0) = {values[0]}")
        if np.any(values[1:] >= 0.0):
            at = int(np.flatnonzero(values[1:] >= 0.0)[0]) + 1
            raise KernelError(f"profile must be negative for t > 0, got f({ladder[at]:.4g}) = {values[at]}")

    def compose_decreasing(self, f: Profile, dist: ScalarField) -> ScalarField:
        self.check_profile(f)
        d = dist.values
        if not np.isfinite(d).all() or np.any(d < 0):
            raise InputError("distances must be finite and >= 0")
        values = validate_ext_real(f(d), "composed values")
        return ScalarField(dist.grid, values, upper_bound=0.0)

    def char_supconv_identity(self, X: GridSet, f: Profile, name: str = "radial") -> IdentityReport:
        """sup over the grid of chi + f(|.|) against f(dist_X), node by node."""
        self.check_profile(f)
        kernel = Kernel.radial(f, name=name)
        lhs = envelope_service.sup_convolve_bruteforce(self.char_function(X), kernel).values.values
        rhs = self.compose_decreasing(f, self.distance_transform(X)).values
        both_inf = (lhs == NEG_INF) & (rhs == NEG_INF)
        with np.errstate(invalid="ignore"):
            err = np.where(both_inf, 0.0, np.abs(lhs - rhs))
        err = np.where(np.isnan(err), np.inf, err)
        bad = err > IDENTITY_TOL
        report = IdentityReport(nodes=X.grid.size, mismatches=int(bad.sum()), max_error=float(err.max(initial=0.0)))
        logger.info("char_identity_checked", nodes=report.nodes, mismatches=report.mismatches)
        return report

    def pseudoconvex_equivalence_suite(
        self,
        X: GridSet,
        f: Profile,
        q: int,
        ball_radius: Optional[float] = None,
        seed: int = 0,
    ) -> EquivalenceReport:
        """
        Oracle verdicts of chi at q, f o dist at q and -ln dist at q-1 on
        the complement, plus k * (f o dist) at q for the scaling bridge.

        -ln dist is only sampled where dist exceeds one grid spacing; other
        nodes are NEG_INF and the oracle only tests slices whose balls stay
        in the sampled region.
        """
        grid = X.grid
        chi = self.char_function(X)
        dist = self.distance_transform(X)
        composed = self.compose_decreasing(f, dist)

        oracle = classical_service.classical_qpsh_oracle
        slices = classical_service.default_slices(grid, q, radius=ball_radius) if q < grid.dim_complex else None
        char_status = oracle(chi, q, slices=slices, seed=seed).status
        composed_status = oracle(composed, q, slices=slices, seed=seed).status

        log_status = None
        log_note = None
        if q == 0:
            log_note = "q = 0: clause on -ln dist skipped"
        else:
            h = float(grid.spacing.max())
            far = dist.values > h
            if not far.any():
                log_note = "complement is empty at this resolution: clause vacuous"
            else:
                log_values = np.where(far, -np.log(np.where(far, dist.values, 1.0)), NEG_INF)
                neg_log = ScalarField(grid, log_values)
                log_slices = None
                if q - 1 < grid.dim_complex:
                    log_slices = classical_service.default_slices(grid, q - 1, radius=ball_radius, region=far)
                if log_slices == []:
                    log_note = "no slice ball fits in the sampled complement: clause vacuous"
                else:
                    log_status = oracle(neg_log, q - 1, slices=log_slices, seed=seed).status

        scaling = []
        if composed_status == "PASS":
            for k in SCALING_KS:
                scaled = field_service.scale_field(k, composed)
                scaling.append(ScalingResult(k=k, status=oracle(scaled, q, slices=slices, seed=seed).status))

        report = EquivalenceReport(
            q=q,
            char_status=char_status,
            composed_status=composed_status,
            log_status=log_status,
            log_note=log_note,
            scaling=scaling,
        )
        logger.info("equivalence_suite_done", q=q, agree=report.agree, scaling_ok=report.scaling_ok)
        return report


setgeom_service = SetGeomService()
