"""
Sup-convolution engine.

- bruteforce: exact discrete supremum over every source node, chunked over queries
- fast: dimension-by-dimension lower envelope of parabolas for quadratic kernels
- theta family, envelope axioms, semiconvexity and radius-bound checks
"""

from typing import Optional, Sequence

import numpy as np

from mqpsh.core.config import settings
from mqpsh.core.errors import GridError, InputError, UnboundedFieldError
from mqpsh.core.logger import logger
from mqpsh.models.envelope import EnvelopeResult
from mqpsh.models.grid import NEG_INF, BoxGrid, ScalarField, squared_norm
from mqpsh.models.kernel import Kernel
from mqpsh.schemas.report import (
    ClauseResult,
    EnvelopeAxiomsReport,
    RadiusBoundReport,
    SemiconvexityReport,
    ThetaFamilyReport,
)
from mqpsh.workers.pool import fan_out

SEMICONVEX_TOL = 1e-9
MONOTONE_TOL = 1e-12


def lower_envelope_1d(positions: np.ndarray, f: np.ndarray, weight: float) -> tuple[np.ndarray, np.ndarray]:
    """
    g(p_j) = min_i f_i + weight * (p_j - p_i)^2 at every sample position.

    Entries with f = +inf are skipped. Returns (g, source index), the index
    being -1 where every entry is +inf.
    """
    m = positions.size
    live = np.flatnonzero(np.isfinite(f))
    g = np.full(m, np.inf)
    src = np.full(m, -1, dtype=np.intp)
    if live.size == 0:
        return g, src

    v = np.empty(live.size, dtype=np.intp)
    z = np.empty(live.size + 1)
    k = 0
    v[0] = live[0]
    z[0] = -np.inf
    z[1] = np.inf
    for q in live[1:]:
        pq = positions[q]
        fq = f[q] + weight * pq * pq
        while True:
            pv = positions[v[k]]
            s = (fq - (f[v[k]] + weight * pv * pv)) / (2.0 * weight * (pq - pv))
            if s > z[k]:
                break
            k -= 1
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = np.inf

    k = 0
    for j in range(m):
        while z[k + 1] < positions[j]:
            k += 1
        d = positions[j] - positions[v[k]]
        g[j] = f[v[k]] + weight * d * d
        src[j] = v[k]
    return g, src


class EnvelopeService:

    def __init__(self, chunk: int):
        self.chunk = chunk

    # ---- brute force ----

    def sup_convolve_bruteforce(
        self,
        u: ScalarField,
        kernel: Kernel,
        query: Optional[BoxGrid] = None,
        source_mask: Optional[np.ndarray] = None,
        prune: bool = True,
    ) -> EnvelopeResult:
        source_grid = u.grid
        query = source_grid if query is None else query
        if query.real_dim != source_grid.real_dim:
            raise GridError("query and source grids live in different dimensions")

        src_idx = np.arange(source_grid.size) if source_mask is None else np.flatnonzero(np.asarray(source_mask, dtype=bool).ravel())
        if src_idx.size == 0:
            raise InputError("empty source set")

        X = source_grid.points()[src_idx]
        ux = u.values[src_idx]
        Y = query.points()
        M = u.derived_upper_bound()
        use_window = prune and kernel.kind == "quadratic" and M is not None

        if use_window:
            near, _ = source_grid.nearest_index(Y, strict=False)
            near_pts = source_grid.points()[near]
            lb = u.values[near] - kernel.theta * squared_norm(Y - near_pts)
            if source_mask is not None:
                lb = np.where(np.asarray(source_mask, dtype=bool).ravel()[near], lb, NEG_INF)
            with np.errstate(invalid="ignore"):
                r2 = (M - lb) / kernel.theta

        def run_chunk(bounds: tuple[int, int]):
            start, stop = bounds
            y = Y[start:stop]
            cand = np.arange(X.shape[0])
            mask = None
            if use_window:
                r2c = r2[start:stop]
                if np.isfinite(r2c).all():
                    radius = float(np.sqrt(r2c.max()))
                    lo = y.min(axis=0) - radius
                    hi = y.max(axis=0) + radius
                    cand = np.flatnonzero(np.all((X >= lo - 1e-12) & (X <= hi + 1e-12), axis=1))
                    d2 = squared_norm(y[:, None, :] - X[None, cand, :])
                    mask = d2 <= r2c[:, None] * (1 + 1e-12) + 1e-300
            if cand.size == 0:
                cand = np.arange(X.shape[0])
                mask = None
            vals = ux[None, cand] + kernel.evaluate(y[:, None, :] - X[None, cand, :])
            if mask is not None:
                vals = np.where(mask, vals, NEG_INF)
            best = np.argmax(vals, axis=1)
            best_val = vals[np.arange(vals.shape[0]), best]
            return best_val, src_idx[cand[best]]

        bounds = [(s, min(s + self.chunk, query.size)) for s in range(0, query.size, self.chunk)]
        parts = fan_out(run_chunk, bounds)
        values = np.concatenate([p[0] for p in parts])
        argmax = np.concatenate([p[1] for p in parts]).astype(np.intp)

        attained = np.isfinite(values)
        argmax = np.where(attained, argmax, -1)
        logger.info(
            "envelope_computed",
            engine="bruteforce",
            kernel=kernel.describe(),
            queries=query.size,
            sources=int(src_idx.size),
            attained=int(attained.sum()),
        )
        return self._result(values, argmax, attained, source_grid, query, "bruteforce")

    @staticmethod
    def _result(values, argmax, attained, source_grid: BoxGrid, query: BoxGrid, engine: str) -> EnvelopeResult:
        interior_src = np.zeros(attained.shape, dtype=bool)
        interior_src[attained] = source_grid.interior_mask[argmax[attained]]
        proper = attained & interior_src & query.interior_mask
        return EnvelopeResult(
            values=ScalarField(query, values),
            argmax_index=argmax,
            attained=attained,
            proper_interior_mask=proper,
            source_grid=source_grid,
            engine=engine,
        )

    # ---- fast separable quadratic envelope ----

    def moreau_envelope_fast(self, u: ScalarField, theta: float) -> EnvelopeResult:
        """sup_x u(x) - theta |y - x|^2 on u's own grid, one axis pass at a time."""
        if not theta > 0:
            raise InputError(f"theta must be > 0, got {theta}")
        grid = u.grid
        shape = grid.shape
        d = grid.real_dim

        g = (-u.values).reshape(shape)
        arg = np.indices(shape).transpose(*range(1, d + 1), 0).copy()

        for axis in range(d):
            pos = grid.axis_coords(axis)
            moved = np.moveaxis(g, axis, -1)
            lines = moved.reshape(-1, shape[axis])
            out = np.empty_like(lines)
            pick = np.empty(lines.shape, dtype=np.intp)
            for i in range(lines.shape[0]):
                out[i], pick[i] = lower_envelope_1d(pos, lines[i], theta)

            pick = np.where(pick < 0, 0, pick)
            g = np.moveaxis(out.reshape(moved.shape), -1, axis)
            idx = np.moveaxis(pick.reshape(moved.shape), -1, axis)
            arg = np.take_along_axis(arg, idx[..., None], axis=axis)

        flat_arg = grid.ravel(arg.reshape(-1, d))
        attained = np.isfinite(g.ravel())
        argmax = np.where(attained, flat_arg, -1)

        pts = grid.points()
        values = np.full(grid.size, NEG_INF)
        hit = np.flatnonzero(attained)
        values[hit] = u.values[argmax[hit]] - theta * squared_norm(pts[hit] - pts[argmax[hit]])

        logger.info("envelope_computed", engine="fast", theta=theta, nodes=grid.size, attained=int(attained.sum()))
        return self._result(values, argmax, attained, grid, grid, "fast")

    def envelope(self, u: ScalarField, kernel: Kernel) -> EnvelopeResult:
        """Fast path for quadratic kernels, brute force otherwise."""
        if kernel.kind == "quadratic":
            return self.moreau_envelope_fast(u, kernel.theta)
        return self.sup_convolve_bruteforce(u, kernel)

    # ---- theta family ----

    def theta_family(self, u: ScalarField, thetas: Sequence[float], floor: float = -1e6) -> tuple[list[EnvelopeResult], ThetaFamilyReport]:
        if u.upper_bound is None:
            raise UnboundedFieldError("theta_family needs a field with an upper bound")
        thetas = [float(t) for t in thetas]
        if not thetas or any(b <= a for a, b in zip(thetas, thetas[1:])) or thetas[0] <= 0:
            raise InputError("thetas must be positive and strictly increasing")

        results = [self.moreau_envelope_fast(u, t) for t in thetas]
        finite = u.finite_mask
        neg_inf = ~finite

        monotone_violations = 0
        max_excess = 0.0
        for prev, nxt in zip(results, results[1:]):
            with np.errstate(invalid="ignore"):
                excess = nxt.values.values - prev.values.values
            excess = np.where(np.isfinite(excess), excess, 0.0)
            monotone_violations += int(np.count_nonzero(excess > MONOTONE_TOL))
            max_excess = max(max_excess, float(excess.max(initial=0.0)))

        lower_violations = 0
        gaps = []
        for res in results:
            gap = res.values.values[finite] - u.values[finite]
            lower_violations += int(np.count_nonzero(gap < -MONOTONE_TOL))
            gaps.append(float(gap.max(initial=0.0)))

        crossings = [int(np.count_nonzero(res.values.values[neg_inf] < floor)) for res in results]
        report = ThetaFamilyReport(
            thetas=thetas,
            monotone_violations=monotone_violations,
            max_monotone_excess=max_excess,
            lower_bound_violations=lower_violations,
            max_gaps=gaps,
            neg_inf_nodes=int(neg_inf.sum()),
            floor=floor,
            floor_crossings=crossings,
        )
        logger.info("theta_family_checked", thetas=len(thetas), monotone_violations=monotone_violations)
        return results, report

    # ---- checks ----

    def check_envelope_axioms(self, u: ScalarField, kernel: Kernel, result: EnvelopeResult) -> EnvelopeAxiomsReport:
        d = u.grid.real_dim
        env = result.values.values
        clauses = []

        # (1) u <= u^Phi on the source nodes
        if kernel.value_at_origin(d) != 0.0:
            clauses.append(ClauseResult(clause="1", name="u <= envelope", status="SKIP", note="Phi(0) != 0"))
        elif result.query_grid != u.grid:
            clauses.append(ClauseResult(clause="1", name="u <= envelope", status="SKIP", note="query grid differs from source grid"))
        else:
            with np.errstate(invalid="ignore"):
                short = np.where(u.finite_mask, u.values - env, 0.0)
            bad = np.flatnonzero(short > MONOTONE_TOL)
            clauses.append(ClauseResult(
                clause="1",
                name="u <= envelope",
                status="FAIL" if bad.size else "PASS",
                violations=int(bad.size),
                max_error=float(max(short.max(initial=0.0), 0.0)),
                first_node=int(bad[0]) if bad.size else None,
            ))

        # (2) Phi <= 0 and u <= M give envelope <= M
        M = u.derived_upper_bound()
        if not kernel.is_nonpositive(d):
            clauses.append(ClauseResult(clause="2", name="envelope <= M", status="SKIP", note="Phi is not <= 0"))
        elif M is None:
            clauses.append(ClauseResult(clause="2", name="envelope <= M", status="SKIP", note="u is identically NEG_INF"))
        else:
            over = np.where(np.isfinite(env), env - M, 0.0)
            bad = np.flatnonzero(over > MONOTONE_TOL)
            clauses.append(ClauseResult(
                clause="2",
                name="envelope <= M",
                status="FAIL" if bad.size else "PASS",
                violations=int(bad.size),
                max_error=float(max(over.max(initial=0.0), 0.0)),
                first_node=int(bad[0]) if bad.size else None,
            ))

        # (3) envelope identically NEG_INF iff u or Phi is
        expect_neg_inf = u.is_neg_inf or kernel.is_identically_neg_inf(d)
        all_neg_inf = result.values.is_neg_inf
        ok = expect_neg_inf == all_neg_inf
        note = None
        if ok and kernel.kind == "quadratic" and not expect_neg_inf:
            ok = bool(np.isfinite(env).all())
            note = "finite Phi: envelope must be finite everywhere"
        clauses.append(ClauseResult(clause="3", name="NEG_INF iff u or Phi is", status="PASS" if ok else "FAIL", violations=0 if ok else 1, note=note))

        # (4) finite on the proper set, attained values reproduce exactly
        attained = np.flatnonzero(result.attained)
        if expect_neg_inf:
            clauses.append(ClauseResult(clause="4", name="finite on the proper set", status="SKIP", note="u or Phi is identically NEG_INF"))
        else:
            src_pts = result.source_grid.points()[result.argmax_index[attained]]
            qry_pts = result.query_grid.points()[attained]
            replay = u.values[result.argmax_index[attained]] + kernel.evaluate(qry_pts - src_pts)
            err = np.abs(replay - env[attained]) if attained.size else np.zeros(0)
            err = np.where(np.isfinite(err), err, np.inf)
            bad = np.flatnonzero(~np.isfinite(env[attained]) | (err > MONOTONE_TOL * (1 + np.abs(env[attained]))))
            clauses.append(ClauseResult(
                clause="4",
                name="finite on the proper set",
                status="FAIL" if bad.size else "PASS",
                violations=int(bad.size),
                max_error=float(err.max(initial=0.0)) if np.isfinite(err).all() else float("inf"),
                first_node=int(attained[bad[0]]) if bad.size else None,
            ))
        return EnvelopeAxiomsReport(clauses=clauses)

    def semiconvexity_check(
        self,
        F: ScalarField,
        delta: float,
        region: Optional[np.ndarray] = None,
        random_triples: int = 200,
        seed: int = 0,
    ) -> SemiconvexityReport:
        """Midpoint convexity of F + delta |y|^2 on axis triples and random grid-collinear triples."""
        grid = F.grid
        pts = grid.points()
        G = F.values + delta * squared_norm(pts)
        inside = np.ones(grid.size, dtype=bool) if region is None else np.asarray(region, dtype=bool).ravel()
        usable = np.isfinite(G) & inside
        skipped = int(np.count_nonzero(~np.isfinite(F.values) & inside))

        multi = grid.unravel(np.arange(grid.size))
        counts = np.asarray(grid.counts)
        triples = []
        for axis in range(grid.real_dim):
            ok = (multi[:, axis] >= 1) & (multi[:, axis] <= counts[axis] - 2)
            mids = np.flatnonzero(ok)
            triples.append(np.stack([mids - grid.strides[axis], mids, mids + grid.strides[axis]], axis=1))

        rng = np.random.default_rng(seed)
        extra = []
        attempts = 0
        while len(extra) < random_triples and attempts < 50 * random_triples:
            attempts += 1
            v = rng.integers(-2, 3, size=grid.real_dim)
            if not v.any():
                continue
            a = rng.integers(0, counts)
            k = int(rng.integers(1, 4))
            b = a + 2 * k * v
            if np.any(b < 0) or np.any(b >= counts):
                continue
            extra.append([grid.ravel(a), grid.ravel(a + k * v), grid.ravel(b)])
        if extra:
            triples.append(np.array(extra, dtype=np.intp))
        all_triples = np.concatenate(triples) if triples else np.zeros((0, 3), dtype=np.intp)

        keep = usable[all_triples].all(axis=1)
        t = all_triples[keep]
        excess = G[t[:, 1]] - 0.5 * (G[t[:, 0]] + G[t[:, 2]])
        bad = np.flatnonzero(excess > SEMICONVEX_TOL)
        report = SemiconvexityReport(
            delta=delta,
            triples_checked=int(t.shape[0]),
            violations=int(bad.size),
            max_excess=float(max(excess.max(initial=0.0), 0.0)),
            first_violation=t[bad[0]].tolist() if bad.size else None,
            skipped_nodes=skipped,
        )
        logger.info("semiconvexity_checked", delta=delta, triples=report.triples_checked, violations=report.violations)
        return report

    def radius_bound_check(self, u: ScalarField, theta: float, result: EnvelopeResult) -> RadiusBoundReport:
        """Every maximizer lies within |y - x|^2 <= (M - F(y)) / theta."""
        M = u.derived_upper_bound()
        if M is None:
            raise UnboundedFieldError("radius bound needs a field that is not identically NEG_INF")
        hit = np.flatnonzero(result.attained)
        y = result.query_grid.points()[hit]
        x = result.source_grid.points()[result.argmax_index[hit]]
        d2 = squared_norm(y - x)
        bound = (M - result.values.values[hit]) / theta
        excess = d2 - bound
        bad = excess > 1e-12 * (1 + np.abs(bound))
        return RadiusBoundReport(
            theta=theta,
            upper_bound=M,
            checked=int(hit.size),
            violations=int(np.count_nonzero(bad)),
            max_excess=float(max(excess.max(initial=0.0), 0.0)),
        )


envelope_service = EnvelopeService(chunk=settings.BRUTEFORCE_CHUNK)
