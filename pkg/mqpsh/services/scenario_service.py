"""
Scenario runner.

A scenario is loaded from TOML, validated by the pydantic models in
`mqpsh.schemas.scenario`, and executed stage by stage against an artifact
store. Assertion stages append SummaryRow entries; the first failing row
that carries a witness is kept for the exit report.
"""

import tomllib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from mqpsh.core.config import settings
from mqpsh.core.errors import AssertionFailed, ConfigError, MqpshError
from mqpsh.core.logger import logger
from mqpsh.models.grid import NEG_INF, BoxGrid, ScalarField
from mqpsh.models.gridset import GridSet
from mqpsh.models.kernel import Kernel
from mqpsh.models.matrix import HermitianMatrix
from mqpsh.schemas.report import ScenarioReport, SummaryRow
from mqpsh.schemas.scenario import (
    CharIdentityStage,
    DistanceTransformStage,
    EnvelopeAxiomsStage,
    EquivalenceSuiteStage,
    FunctionSpec,
    HessianStage,
    KernelSpec,
    MagicPropertyStage,
    MaskSpec,
    ProbeConfig,
    QpshCheckStage,
    Scenario,
    SemiconvexityStage,
    SmoothIndexStage,
    StrictCheckStage,
    SupconvStage,
    ThetaFamilyStage,
)
from mqpsh.schemas.verdict import QpshVerdict, VerdictSet
from mqpsh.services.catalog_service import CatalogFunction, catalog_service
from mqpsh.services.classical_service import classical_service
from mqpsh.services.envelope_service import envelope_service
from mqpsh.services.field_service import field_service
from mqpsh.services.hessian_service import hessian_service
from mqpsh.services.qpsh_service import qpsh_service
from mqpsh.services.setgeom_service import IDENTITY_TOL, setgeom_service
from mqpsh.services.viscosity_service import viscosity_service
from mqpsh.utils.storage import read_field_csv, read_mask_csv, write_field_csv, write_mask_csv, write_report

Artifact = Union[ScalarField, GridSet, BaseModel]
ModelT = TypeVar("ModelT", bound=BaseModel)

BUNDLED_PACKAGE = "mqpsh.scenarios"
# published names of the bundled scenarios
SCENARIO_ALIASES = {
    "lemma33_axioms": "envelope_axioms",
    "example46_regression": "im4_abs_regression",
}
SUPCONV_TOL = 1e-9
ZERO_SET_ATOL = 1e-12

PROFILES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "neg_t": lambda t: -np.asarray(t, dtype=float),
    "neg_t2": lambda t: -np.asarray(t, dtype=float) ** 2,
    "neg_log1p": lambda t: -np.log1p(np.asarray(t, dtype=float)),
    "step": lambda t: np.where(np.asarray(t, dtype=float) > 0, -1.0, 0.0),
}

# Stages that read a field artifact through `input`.
FIELD_STAGES = (
    SupconvStage,
    EnvelopeAxiomsStage,
    SemiconvexityStage,
    ThetaFamilyStage,
    HessianStage,
    SmoothIndexStage,
    QpshCheckStage,
    StrictCheckStage,
    MagicPropertyStage,
)

# Stages that publish no report under their name.
SILENT_STAGES = (SupconvStage, HessianStage, DistanceTransformStage)


def build_kernel(spec: KernelSpec) -> Kernel:
    if spec.kind == "quadratic":
        return Kernel.quadratic(spec.theta, spec.delta)
    return Kernel.radial(PROFILES[spec.profile], name=spec.profile, semiconvex_delta=spec.delta)


def resolve_scenario_path(name: str) -> Path:
    """A path on disk, or the name or alias of a bundled scenario (with or without .toml)."""
    path = Path(name)
    if path.exists():
        return path
    stem = path.name.removesuffix(".toml")
    stem = f"{SCENARIO_ALIASES.get(stem, stem)}.toml"
    bundled = resources.files(BUNDLED_PACKAGE) / stem
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError("scenario file not found", location=name)


def bundled_scenarios() -> list[str]:
    return sorted(
        entry.name.removesuffix(".toml")
        for entry in resources.files(BUNDLED_PACKAGE).iterdir()
        if entry.name.endswith(".toml")
    )


def _load_toml(path: Path, model: type[ModelT], what: str) -> ModelT:
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"{what} file not found", location=str(path)) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc), location=str(path)) from exc
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = ".".join(str(part) for part in err["loc"])
        raise ConfigError(err["msg"], location=f"{path}:{loc}") from exc


def load_scenario(path: Path) -> Scenario:
    return _load_toml(path, Scenario, "scenario")


def load_probe_config(path: Path) -> ProbeConfig:
    return _load_toml(path, ProbeConfig, "probe config")


def _theta_name(prefix: str, theta: float) -> str:
    return f"{prefix}{theta:g}"


def check_references(scenario: Scenario):
    """Every stage input and every output names an artifact that exists by then."""
    known = set(scenario.fields)
    if scenario.function is not None:
        known.add("u")
    for i, stage in enumerate(scenario.pipeline):
        if isinstance(stage, FIELD_STAGES) and stage.input not in known:
            raise ConfigError(f"unknown artifact {stage.input!r}", location=f"pipeline.{i}.input")
        if stage.name and not isinstance(stage, SILENT_STAGES):
            known.add(stage.name)
        if isinstance(stage, (SupconvStage, DistanceTransformStage)):
            known.add(stage.output)
        elif isinstance(stage, (QpshCheckStage, MagicPropertyStage)) and stage.output:
            known.add(stage.output)
        elif isinstance(stage, ThetaFamilyStage) and stage.output_prefix:
            known.update(_theta_name(stage.output_prefix, t) for t in stage.thetas)
    for j, out in enumerate(scenario.outputs):
        if out.artifact not in known:
            raise ConfigError(f"unknown artifact {out.artifact!r}", location=f"outputs.{j}.artifact")


@dataclass
class ScenarioContext:
    scenario: Scenario
    base_dir: Path
    artifacts: dict[str, Artifact] = field(default_factory=dict)
    functions: dict[str, CatalogFunction] = field(default_factory=dict)
    rows: list[SummaryRow] = field(default_factory=list)
    first_failure: Optional[str] = None
    witness: Optional[BaseModel] = None

    @property
    def seed(self) -> int:
        return self.scenario.seed

    def put(self, name: Optional[str], artifact: Artifact):
        if name:
            self.artifacts[name] = artifact

    def scalar_field(self, name: str, location: str) -> ScalarField:
        artifact = self.artifacts.get(name)
        if not isinstance(artifact, ScalarField):
            raise ConfigError(f"artifact {name!r} is not a field", location=location)
        return artifact

    def function(self, name: str, location: str) -> CatalogFunction:
        fn = self.functions.get(name)
        if fn is None:
            raise ConfigError(f"artifact {name!r} was not built from the catalog", location=location)
        return fn

    def grid(self, name: str, location: str) -> BoxGrid:
        artifact = self.artifacts.get(name)
        if isinstance(artifact, (ScalarField, GridSet)):
            return artifact.grid
        if self.scenario.grid is not None:
            return self.scenario.grid.to_grid()
        raise ConfigError("no grid: give a top-level grid or an input field", location=location)

    def record(self, name: str, ok: bool, max_error: float = 0.0, detail: Optional[str] = None, witness: Optional[BaseModel] = None):
        row = SummaryRow(name=name, status="PASS" if ok else "FAIL", max_error=float(max_error), detail=detail)
        self.rows.append(row)
        if not ok:
            logger.warning("assertion_failed", row=name, detail=detail)
            if self.first_failure is None:
                self.first_failure = name
            if self.witness is None and witness is not None:
                self.witness = witness


class ScenarioService:

    def __init__(self):
        self._handlers = {
            "supconv": self._supconv,
            "envelope_axioms": self._envelope_axioms,
            "semiconvexity": self._semiconvexity,
            "theta_family": self._theta_family,
            "hessian": self._hessian,
            "smooth_index": self._smooth_index,
            "qpsh_check": self._qpsh_check,
            "strict_check": self._strict_check,
            "distance_transform": self._distance_transform,
            "char_identity": self._char_identity,
            "equivalence_suite": self._equivalence_suite,
            "magic_property": self._magic_property,
        }

    # ---- entry points ----

    def run_scenario(self, name: str, out_dir: Optional[Path] = None) -> ScenarioReport:
        path = resolve_scenario_path(name)
        scenario = load_scenario(path)
        check_references(scenario)
        out_dir = Path.cwd() if out_dir is None else Path(out_dir)
        ctx = ScenarioContext(scenario, base_dir=path.parent)
        logger.info("scenario_started", scenario=scenario.name, stages=len(scenario.pipeline))

        if scenario.function is not None:
            self._build_field(ctx, "u", scenario.function, "function")
        for key, spec in scenario.fields.items():
            self._build_field(ctx, key, spec, f"fields.{key}")

        for i, stage in enumerate(scenario.pipeline):
            label = stage.name or f"{i}:{stage.op}"
            try:
                self._handlers[stage.op](ctx, stage, label, f"pipeline.{i}")
            except MqpshError as exc:
                logger.error("stage_failed", stage=label, error=str(exc))
                raise

        written = [str(self._write(ctx, out.artifact, out_dir / out.path)) for out in scenario.outputs]
        report = ScenarioReport(
            name=scenario.name,
            rows=ctx.rows,
            written=written,
            first_failure=ctx.first_failure,
            witness=ctx.witness,
        )
        logger.info("scenario_finished", scenario=scenario.name, rows=len(ctx.rows), failed=len(report.failed))
        return report

    @staticmethod
    def assert_passed(report: ScenarioReport):
        if report.passed:
            return
        failed = report.failed
        raise AssertionFailed(
            f"{len(failed)} of {len(report.rows)} assertions failed; first: {report.first_failure}",
            witness=report.witness,
        )

    # ---- artifacts ----

    def _build_field(self, ctx: ScenarioContext, name: str, spec: FunctionSpec, location: str):
        if spec.input is not None:
            grid = spec.grid.to_grid() if spec.grid is not None else None
            ctx.put(name, read_field_csv(ctx.base_dir / spec.input, grid))
            return
        grid_spec = spec.grid or ctx.scenario.grid
        if grid_spec is None:
            raise ConfigError("catalog functions need a grid", location=f"{location}.grid")
        fn = catalog_service.build(spec.catalog, spec.params)
        ctx.functions[name] = fn
        ctx.put(name, field_service.sample(fn, grid_spec.to_grid()))

    def _mask(self, ctx: ScenarioContext, spec: MaskSpec, grid: BoxGrid, location: str) -> GridSet:
        if spec.input is not None:
            return read_mask_csv(ctx.base_dir / spec.input, grid)
        if spec.ball is not None:
            center = np.zeros(grid.real_dim) if spec.ball.center is None else spec.ball.center
            return GridSet.ball(grid, center, spec.ball.radius)
        if spec.slab is not None:
            if any(not 0 <= a < grid.real_dim for a in spec.slab.axes):
                raise ConfigError(f"slab axes must lie in 0..{grid.real_dim - 1}", location=f"{location}.slab.axes")
            return GridSet.slab(grid, spec.slab.axes, spec.slab.half_width)
        if spec.random_fraction is not None:
            rng = np.random.default_rng(ctx.seed)
            mask = rng.random(grid.size) < spec.random_fraction
            if not mask.any():
                mask[int(rng.integers(grid.size))] = True
            return GridSet(grid, mask)
        if spec.points is not None:
            index, _ = grid.nearest_index(np.asarray(spec.points, dtype=float))
            return GridSet.from_indices(grid, index)
        return GridSet.full(grid)

    def _write(self, ctx: ScenarioContext, name: str, path: Path) -> Path:
        artifact = ctx.artifacts.get(name)
        if artifact is None:
            raise ConfigError(f"artifact {name!r} was never produced", location="outputs")
        if isinstance(artifact, ScalarField):
            return write_field_csv(artifact, path)
        if isinstance(artifact, GridSet):
            return write_mask_csv(artifact, path)
        return write_report(artifact, path)

    # ---- stages ----

    def _supconv(self, ctx: ScenarioContext, stage: SupconvStage, label: str, location: str):
        u = ctx.scalar_field(stage.input, f"{location}.input")
        kernel = build_kernel(stage.kernel)
        if stage.engine == "fast":
            if kernel.kind != "quadratic":
                raise ConfigError("the fast engine needs a quadratic kernel", location=f"{location}.engine")
            result = envelope_service.moreau_envelope_fast(u, kernel.theta)
        elif stage.engine == "bruteforce":
            result = envelope_service.sup_convolve_bruteforce(u, kernel)
        else:
            result = envelope_service.envelope(u, kernel)
        ctx.put(stage.output, result.values)

        if stage.check_bruteforce:
            brute = envelope_service.sup_convolve_bruteforce(u, kernel).values.values
            fast = result.values.values
            same_inf = (brute == NEG_INF) == (fast == NEG_INF)
            with np.errstate(invalid="ignore"):
                err = np.where(np.isfinite(brute) & np.isfinite(fast), np.abs(brute - fast), 0.0)
            max_err = float(err.max(initial=0.0))
            ok = bool(same_inf.all()) and max_err <= SUPCONV_TOL
            ctx.record(f"{label}:bruteforce", ok, max_err, f"engine={result.engine}")

    def _envelope_axioms(self, ctx: ScenarioContext, stage: EnvelopeAxiomsStage, label: str, location: str):
        u = ctx.scalar_field(stage.input, f"{location}.input")
        kernel = build_kernel(stage.kernel)
        result = envelope_service.envelope(u, kernel)
        report = envelope_service.check_envelope_axioms(u, kernel, result)
        for clause in report.clauses:
            detail = f"{clause.name}" + (f"; skipped: {clause.note}" if clause.status == "SKIP" else "")
            ctx.record(f"{label}:clause{clause.clause}", clause.status != "FAIL", clause.max_error, detail)

        if stage.semiconvexity:
            if kernel.semiconvex_delta is None:
                ctx.record(f"{label}:clause5", True, detail="semiconvexity; skipped: kernel has no delta")
            else:
                semi = envelope_service.semiconvexity_check(result.values, kernel.semiconvex_delta, seed=ctx.seed)
                ctx.record(
                    f"{label}:clause5",
                    semi.passed,
                    semi.max_excess,
                    f"F + {kernel.semiconvex_delta:g}|y|^2 convex on {semi.triples_checked} triples",
                )
        if stage.radius_bound and kernel.kind == "quadratic" and not u.is_neg_inf:
            bound = envelope_service.radius_bound_check(u, kernel.theta, result)
            ctx.record(f"{label}:radius-bound", bound.passed, bound.max_excess, f"{bound.checked} maximizers")
        ctx.put(stage.name, report)

    def _semiconvexity(self, ctx: ScenarioContext, stage: SemiconvexityStage, label: str, location: str):
        F = ctx.scalar_field(stage.input, f"{location}.input")
        report = envelope_service.semiconvexity_check(F, stage.delta, random_triples=stage.random_triples, seed=ctx.seed)
        ctx.record(label, report.passed, report.max_excess, f"{report.triples_checked} triples")
        ctx.put(stage.name, report)

    def _theta_family(self, ctx: ScenarioContext, stage: ThetaFamilyStage, label: str, location: str):
        u = ctx.scalar_field(stage.input, f"{location}.input").with_upper_bound()
        results, report = envelope_service.theta_family(u, stage.thetas, stage.floor)
        ctx.record(f"{label}:monotone", report.monotone_violations == 0, report.max_monotone_excess)
        ctx.record(
            f"{label}:above-u",
            report.lower_bound_violations == 0,
            detail=f"max gaps {', '.join(f'{g:.3g}' for g in report.max_gaps)}",
        )
        if stage.output_prefix:
            for theta, res in zip(report.thetas, results):
                ctx.put(_theta_name(stage.output_prefix, theta), res.values)
        ctx.put(stage.name, report)

    def _hessian(self, ctx: ScenarioContext, stage: HessianStage, label: str, location: str):
        fn = ctx.function(stage.input, f"{location}.input")
        if fn.hessian is None:
            raise ConfigError(f"{fn.name} has no closed-form complex Hessian", location=f"{location}.input")
        if stage.min_abs_im >= stage.half_width:
            raise ConfigError("min_abs_im must be below half_width", location=f"{location}.min_abs_im")
        n = ctx.grid(stage.input, location).dim_complex
        rng = np.random.default_rng(ctx.seed)
        re = rng.uniform(-stage.half_width, stage.half_width, size=(stage.points, n))
        mag = rng.uniform(stage.min_abs_im, stage.half_width, size=(stage.points, n))
        sign = np.where(rng.random((stage.points, n)) < 0.5, -1.0, 1.0)
        z = re + 1j * sign * mag

        fd = hessian_service.complex_hessians(fn, z)
        exact = np.stack([fn.hessian(point) for point in z])
        err = float(np.max(np.abs(fd - exact)))
        ctx.record(label, err <= stage.tol, err, f"{stage.points} points, |Im| >= {stage.min_abs_im:g}")

    def _smooth_index(self, ctx: ScenarioContext, stage: SmoothIndexStage, label: str, location: str):
        fn = ctx.function(stage.input, f"{location}.input")
        grid = ctx.grid(stage.input, location)
        report = qpsh_service.smooth_qpsh_index(fn, grid)
        ok = stage.expect_q is None or report.q_star == stage.expect_q
        ctx.record(label, ok, detail=f"q*={report.q_star}")
        ctx.put(stage.name, report)

    def _qpsh_check(self, ctx: ScenarioContext, stage: QpshCheckStage, label: str, location: str):
        u = ctx.scalar_field(stage.input, f"{location}.input")
        grid = u.grid
        n = grid.dim_complex
        modes = ["smooth", "classical", "viscosity"] if stage.mode == "all" else [stage.mode]
        fn = ctx.functions.get(stage.input)
        if stage.mode == "all" and (fn is None or not fn.smooth):
            modes.remove("smooth")
        if any(a < 0 or a >= grid.real_dim for a in stage.forbid_touch_on_zero_of):
            raise ConfigError(f"axes must lie in 0..{grid.real_dim - 1}", location=f"{location}.forbid_touch_on_zero_of")

        verdicts: dict[str, QpshVerdict] = {}
        for mode in modes:
            if mode == "smooth":
                fn = ctx.function(stage.input, f"{location}.mode")
                report = qpsh_service.smooth_qpsh_index(fn, grid)
                verdicts[mode] = qpsh_service.smooth_verdict(report, stage.q)
            elif mode == "classical":
                slices = None
                if stage.ball_radius is not None and stage.q < n:
                    slices = classical_service.default_slices(grid, stage.q, radius=stage.ball_radius)
                verdicts[mode] = classical_service.classical_qpsh_oracle(
                    u, stage.q, slices=slices, balls_per_slice=stage.balls_per_slice, seed=ctx.seed
                )
            else:
                verdicts[mode] = viscosity_service.viscosity_falsifier(
                    u,
                    stage.q,
                    window=stage.window,
                    center_stride=stage.center_stride,
                    seed=ctx.seed,
                    probes=stage.probes.build(u.grid.dim_complex, ctx.seed) if stage.probes is not None else None,
                    record_touches=bool(stage.forbid_touch_on_zero_of),
                )

        single = len(verdicts) == 1
        for mode, verdict in verdicts.items():
            gap = verdict.witness.gap if verdict.witness is not None else 0.0
            detail = f"{verdict.status}, expected {stage.expect}" + (f"; {verdict.note}" if verdict.note else "")
            ctx.record(label if single else f"{label}:{mode}", verdict.status == stage.expect, gap, detail, verdict.witness)

        viscosity = verdicts.get("viscosity")
        if stage.forbid_touch_on_zero_of and viscosity is not None:
            axes = list(stage.forbid_touch_on_zero_of)
            pts = grid.points()
            on_zero = [
                t for t in viscosity.touch_points
                if np.all(np.abs(pts[t.point_index, axes]) <= ZERO_SET_ATOL)
            ]
            detail = f"{len(viscosity.touch_points)} touch points"
            if on_zero:
                detail += f"; first on the zero set at node {on_zero[0].point_index} ({on_zero[0].probe_label})"
            ctx.record(f"{label}:no-touch-on-zero-set", not on_zero, detail=detail)

        verdict_set = VerdictSet(q=stage.q, verdicts=verdicts)
        ctx.put(stage.output, verdict_set)
        ctx.put(stage.name, verdict_set)

    def _strict_check(self, ctx: ScenarioContext, stage: StrictCheckStage, label: str, location: str):
        u = ctx.scalar_field(stage.input, f"{location}.input")
        grid = u.grid
        if stage.nodes is not None:
            nodes = np.asarray(stage.nodes, dtype=np.intp)
            if nodes.size and (nodes.min() < 0 or nodes.max() >= grid.size):
                raise ConfigError(f"node indices must lie in 0..{grid.size - 1}", location=f"{location}.nodes")
        else:
            nodes = qpsh_service.ball_nodes(grid, stage.ball_radius)
        if stage.nodes_on_zero_of:
            axes = list(stage.nodes_on_zero_of)
            if any(a < 0 or a >= grid.real_dim for a in axes):
                raise ConfigError(f"axes must lie in 0..{grid.real_dim - 1}", location=f"{location}.nodes_on_zero_of")
            keep = np.all(np.abs(grid.points()[nodes][:, axes]) <= ZERO_SET_ATOL, axis=1)
            nodes = nodes[keep]
        if nodes.size == 0:
            raise ConfigError("no node left to check", location=location)
        if stage.max_nodes is not None and nodes.size > stage.max_nodes:
            picks = np.unique(np.linspace(0, nodes.size - 1, stage.max_nodes).round().astype(int))
            nodes = nodes[picks]

        report = qpsh_service.strict_qpsh_check(
            u, stage.q, stage.epsilons, stage.ball_radius, stage.sub_radius, nodes=nodes.tolist(), seed=ctx.seed
        )
        total = len(report.nodes)
        ok = report.failed_count == total if stage.expect == "all_fail" else report.all_passed
        ctx.record(label, ok, detail=f"{report.failed_count}/{total} nodes not strictly {stage.q}-psh, expected {stage.expect}")
        ctx.put(stage.name, report)

    def _distance_transform(self, ctx: ScenarioContext, stage: DistanceTransformStage, label: str, location: str):
        grid = ctx.grid(stage.input, location)
        X = self._mask(ctx, stage.mask, grid, f"{location}.mask")
        dist = setgeom_service.distance_transform(X)
        ctx.put(stage.output, dist)
        if stage.check_bruteforce:
            brute = setgeom_service.brute_force_distance(X)
            err = float(np.max(np.abs(dist.values - brute.values)))
            ctx.record(f"{label}:bruteforce", err <= IDENTITY_TOL, err, f"|X| = {X.count}")

    def _char_identity(self, ctx: ScenarioContext, stage: CharIdentityStage, label: str, location: str):
        grid = ctx.grid(stage.input, location)
        X = self._mask(ctx, stage.mask, grid, f"{location}.mask")
        report = setgeom_service.char_supconv_identity(X, PROFILES[stage.profile], stage.profile)
        ctx.record(label, report.passed, report.max_error, f"{report.mismatches} mismatching nodes")
        ctx.put(stage.name, report)

    def _equivalence_suite(self, ctx: ScenarioContext, stage: EquivalenceSuiteStage, label: str, location: str):
        grid = ctx.grid(stage.input, location)
        X = self._mask(ctx, stage.mask, grid, f"{location}.mask")
        report = setgeom_service.pseudoconvex_equivalence_suite(
            X, PROFILES[stage.profile], stage.q, stage.ball_radius, seed=ctx.seed
        )
        detail = f"chi={report.char_status} f(dist)={report.composed_status} -ln dist={report.log_status or '-'}"
        if report.log_note:
            detail += f" ({report.log_note})"
        ctx.record(label, report.passed, detail=detail)
        ctx.put(stage.name, report)

    def _magic_property(self, ctx: ScenarioContext, stage: MagicPropertyStage, label: str, location: str):
        u = ctx.scalar_field(stage.input, f"{location}.input")
        n = u.grid.dim_complex
        A, G, H = (self._matrix(text, n, f"{location}.{key}") for key, text in (("a", stage.a), ("g", stage.g), ("h", stage.h)))
        report, F = qpsh_service.magic_property_harness(
            u, stage.q, build_kernel(stage.kernel), A=A, G=G, H=H, reach=stage.reach, seed=ctx.seed
        )
        witness = None
        for verdict in (report.classical, report.viscosity):
            if verdict is not None and verdict.witness is not None:
                witness = verdict.witness
                break
        detail = f"|W| = {report.w_size}" + (f"; {report.note}" if report.note else "")
        ctx.record(label, report.passed, detail=detail, witness=witness)
        ctx.put(stage.output, F if F is not None else ScalarField.neg_inf(u.grid))
        ctx.put(stage.name, report)

    @staticmethod
    def _matrix(text: Optional[str], n: int, location: str) -> Optional[HermitianMatrix]:
        if text is None:
            return None
        try:
            rows = settings.matrix_literal(text)
        except ValueError as exc:
            raise ConfigError(f"bad matrix literal: {exc}", location=location) from exc
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ConfigError(f"expected a {n}x{n} matrix", location=location)
        return HermitianMatrix.from_array(np.array(rows, dtype=complex))


scenario_service = ScenarioService()
