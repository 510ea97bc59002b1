from typing import Literal, Optional

from pydantic import BaseModel

from mqpsh.models.matrix import InertiaSignature
from mqpsh.schemas.verdict import QpshVerdict, TouchPoint, Witness

Status = Literal["PASS", "FAIL", "SKIP"]


class EllipticReport(BaseModel):
    inertia_a: InertiaSignature
    inertia_b: InertiaSignature
    eigenvalues_a: list[float]
    eigenvalues_b: list[float]
    negative_ok: bool
    positive_ok: bool
    interlacing_ok: bool
    max_interlacing_violation: float

    @property
    def passed(self) -> bool:
        return self.negative_ok and self.positive_ok and self.interlacing_ok


class ClauseResult(BaseModel):
    clause: str
    name: str
    status: Status
    violations: int = 0
    max_error: float = 0.0
    first_node: Optional[int] = None
    note: Optional[str] = None


class EnvelopeAxiomsReport(BaseModel):
    clauses: list[ClauseResult]

    @property
    def passed(self) -> bool:
        return all(c.status != "FAIL" for c in self.clauses)


class SemiconvexityReport(BaseModel):
    delta: float
    triples_checked: int
    violations: int
    max_excess: float
    first_violation: Optional[list[int]] = None
    skipped_nodes: int = 0

    @property
    def passed(self) -> bool:
        return self.violations == 0


class ThetaFamilyReport(BaseModel):
    thetas: list[float]
    monotone_violations: int
    max_monotone_excess: float
    lower_bound_violations: int
    max_gaps: list[float]
    neg_inf_nodes: int
    floor: float
    floor_crossings: list[int]

    @property
    def passed(self) -> bool:
        return self.monotone_violations == 0 and self.lower_bound_violations == 0


class RadiusBoundReport(BaseModel):
    theta: float
    upper_bound: float
    checked: int
    violations: int
    max_excess: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


class MaximumPrincipleReport(BaseModel):
    interior_max: float
    boundary_max: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.interior_max <= self.boundary_max + self.tol


class SmoothIndexReport(BaseModel):
    q_star: int
    worst_nodes: list[int]
    worst_points: list[list[float]]
    checked: int


class AgreementReport(BaseModel):
    q: int
    verdicts: dict[str, str]
    agree: bool
    note: Optional[str] = None


class StrictNode(BaseModel):
    node: int
    passed: bool
    best_epsilon: Optional[float] = None


class StrictReport(BaseModel):
    q: int
    epsilons: list[float]
    nodes: list[StrictNode]

    @property
    def passed_count(self) -> int:
        return sum(1 for n in self.nodes if n.passed)

    @property
    def failed_count(self) -> int:
        return len(self.nodes) - self.passed_count

    @property
    def all_passed(self) -> bool:
        return self.failed_count == 0


class PositiveInertiaReport(BaseModel):
    q: int
    touches: int
    violations: int
    first_violation: Optional[TouchPoint] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


class MagicPropertyReport(BaseModel):
    q: int
    w_size: int
    vacuous: bool
    classical: Optional[QpshVerdict] = None
    viscosity: Optional[QpshVerdict] = None
    finite_on_w: Optional[bool] = None
    note: Optional[str] = None

    @property
    def passed(self) -> bool:
        if self.vacuous:
            return True
        ok = all(v is None or v.passed for v in (self.classical, self.viscosity))
        return ok and self.finite_on_w is not False


class StrictPreservationReport(BaseModel):
    q: int
    w_size: int
    strict: Optional[StrictReport] = None
    note: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.strict is None or self.strict.all_passed


class IdentityReport(BaseModel):
    nodes: int
    mismatches: int
    max_error: float

    @property
    def passed(self) -> bool:
        return self.mismatches == 0


class ScalingResult(BaseModel):
    k: float
    status: str


class EquivalenceReport(BaseModel):
    q: int
    char_status: str
    composed_status: str
    log_status: Optional[str] = None
    log_note: Optional[str] = None
    scaling: list[ScalingResult] = []

    @property
    def agree(self) -> bool:
        statuses = {self.char_status, self.composed_status}
        if self.log_status is not None:
            statuses.add(self.log_status)
        return len(statuses) == 1

    @property
    def scaling_ok(self) -> bool:
        if self.composed_status != "PASS":
            return True
        return all(s.status == "PASS" for s in self.scaling)

    @property
    def passed(self) -> bool:
        return self.agree and self.scaling_ok


class SummaryRow(BaseModel):
    name: str
    status: Literal["PASS", "FAIL"]
    max_error: float = 0.0
    detail: Optional[str] = None


class ScenarioReport(BaseModel):
    name: str
    rows: list[SummaryRow]
    written: list[str] = []
    first_failure: Optional[str] = None
    witness: Optional[Witness] = None

    @property
    def failed(self) -> list[SummaryRow]:
        return [r for r in self.rows if r.status == "FAIL"]

    @property
    def passed(self) -> bool:
        return not self.failed
