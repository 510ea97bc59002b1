"""
Scenario files (TOML, `version = 1`).

A scenario names the fields it starts from, an ordered pipeline of stages
and the artifacts to write. Stages read artifacts by name (`input`) and may
publish new ones (`output`); the field built from `function` is published
as "u".
"""

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from mqpsh.models.probe import DEFAULT_BETAS, DEFAULT_DELTAS, DEFAULT_RANDOM_FRAMES, ProbeFamily
from mqpsh.schemas.grid import GridSpec

ProfileName = Literal["neg_t", "neg_t2", "neg_log1p", "step"]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FunctionSpec(StrictModel):
    catalog: Optional[str] = None
    params: dict = {}
    input: Optional[str] = Field(None, description="field CSV, read together with its grid sidecar")
    grid: Optional[GridSpec] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.catalog is None) == (self.input is None):
            raise ValueError("give exactly one of catalog or input")
        return self


class KernelSpec(StrictModel):
    kind: Literal["quadratic", "radial"] = "quadratic"
    theta: Optional[float] = Field(None, gt=0)
    delta: Optional[float] = Field(None, gt=0)
    profile: Optional[ProfileName] = None

    @model_validator(mode="after")
    def _parameters(self):
        if self.kind == "quadratic" and self.theta is None:
            raise ValueError("quadratic kernels need theta")
        if self.kind == "radial" and self.profile is None:
            raise ValueError("radial kernels need a profile")
        return self


class BallMask(StrictModel):
    center: Optional[list[float]] = None
    radius: float = Field(gt=0)


class SlabMask(StrictModel):
    axes: list[int]
    half_width: float = Field(ge=0)


class MaskSpec(StrictModel):
    input: Optional[str] = None
    ball: Optional[BallMask] = None
    slab: Optional[SlabMask] = None
    random_fraction: Optional[float] = Field(None, gt=0, le=1)
    points: Optional[list[list[float]]] = None
    full: bool = False

    @model_validator(mode="after")
    def _one_source(self):
        given = [self.input, self.ball, self.slab, self.random_fraction, self.points]
        count = sum(v is not None for v in given) + int(self.full)
        if count != 1:
            raise ValueError("give exactly one of input, ball, slab, random_fraction, points or full")
        return self


class ProbeConfig(StrictModel):
    """Viscosity probe family; also the format of a `--probes` file."""

    betas: list[float] = Field(list(DEFAULT_BETAS), min_length=1)
    deltas: list[float] = Field(list(DEFAULT_DELTAS), min_length=1)
    random_frames: int = Field(DEFAULT_RANDOM_FRAMES, ge=0, description="seeded Gaussian-integer frames")
    haar_frames: int = Field(0, ge=0, description="seeded Haar-random unitary frames")
    random_polys: int = Field(4, ge=0, description="seeded random pluriharmonic polynomials")
    include_touching: bool = True

    @model_validator(mode="after")
    def _positive(self):
        if min(self.betas) <= 0 or min(self.deltas) <= 0:
            raise ValueError("betas and deltas must be > 0")
        return self

    def build(self, n: int, seed: int = 0) -> ProbeFamily:
        return ProbeFamily.default(
            n,
            seed,
            random_frames=self.random_frames,
            random_polys_count=self.random_polys,
            betas=self.betas,
            deltas=self.deltas,
            haar_frames=self.haar_frames,
            include_touching=self.include_touching,
        )


class StageBase(StrictModel):
    name: Optional[str] = None
    input: str = "u"


class SupconvStage(StageBase):
    op: Literal["supconv"]
    kernel: KernelSpec
    engine: Literal["auto", "fast", "bruteforce"] = "auto"
    check_bruteforce: bool = False
    output: str = "envelope"


class EnvelopeAxiomsStage(StageBase):
    op: Literal["envelope_axioms"]
    kernel: KernelSpec
    semiconvexity: bool = True
    radius_bound: bool = True


class SemiconvexityStage(StageBase):
    op: Literal["semiconvexity"]
    delta: float = Field(gt=0)
    random_triples: int = Field(200, ge=0)


class ThetaFamilyStage(StageBase):
    op: Literal["theta_family"]
    thetas: list[float]
    floor: float = -1e6
    output_prefix: Optional[str] = None


class HessianStage(StageBase):
    op: Literal["hessian"]
    points: int = Field(100, ge=1)
    half_width: float = Field(1.0, gt=0)
    min_abs_im: float = Field(0.0, ge=0)
    tol: float = Field(1e-6, gt=0)


class SmoothIndexStage(StageBase):
    op: Literal["smooth_index"]
    expect_q: Optional[int] = None


class QpshCheckStage(StageBase):
    op: Literal["qpsh_check"]
    q: int = Field(ge=0)
    mode: Literal["smooth", "classical", "viscosity", "all"] = "all"
    expect: Literal["PASS", "FAIL"] = "PASS"
    ball_radius: Optional[float] = Field(None, gt=0)
    balls_per_slice: int = Field(1, ge=1)
    window: int = Field(2, ge=1)
    center_stride: int = Field(1, ge=1)
    probes: Optional[ProbeConfig] = None
    forbid_touch_on_zero_of: list[int] = Field(
        [], description="real coordinate indices; a touch point where all of them vanish fails the stage"
    )
    output: Optional[str] = None


class StrictCheckStage(StageBase):
    op: Literal["strict_check"]
    q: int = Field(ge=0)
    epsilons: list[float]
    ball_radius: float = Field(gt=0)
    sub_radius: Optional[float] = Field(None, gt=0)
    nodes: Optional[list[int]] = None
    nodes_on_zero_of: list[int] = Field([], description="restrict to nodes where these real coordinates vanish")
    max_nodes: Optional[int] = Field(None, ge=1)
    expect: Literal["all_pass", "all_fail"] = "all_pass"


class DistanceTransformStage(StageBase):
    op: Literal["distance_transform"]
    mask: MaskSpec
    check_bruteforce: bool = True
    output: str = "dist"


class CharIdentityStage(StageBase):
    op: Literal["char_identity"]
    mask: MaskSpec
    profile: ProfileName = "neg_t"


class EquivalenceSuiteStage(StageBase):
    op: Literal["equivalence_suite"]
    mask: MaskSpec
    profile: ProfileName = "neg_t"
    q: int = Field(ge=0)
    ball_radius: Optional[float] = Field(None, gt=0)


class MagicPropertyStage(StageBase):
    op: Literal["magic_property"]
    q: int = Field(ge=0)
    kernel: KernelSpec
    a: Optional[str] = Field(None, description="matrix literal, e.g. '1,0 0,0; 0,0 1,0'")
    g: Optional[str] = None
    h: Optional[str] = None
    reach: int = Field(3, ge=1)
    output: Optional[str] = None


Stage = Annotated[
    Union[
        SupconvStage,
        EnvelopeAxiomsStage,
        SemiconvexityStage,
        ThetaFamilyStage,
        HessianStage,
        SmoothIndexStage,
        QpshCheckStage,
        StrictCheckStage,
        DistanceTransformStage,
        CharIdentityStage,
        EquivalenceSuiteStage,
        MagicPropertyStage,
    ],
    Field(discriminator="op"),
]


class OutputSpec(StrictModel):
    artifact: str
    path: str


class Scenario(StrictModel):
    version: Literal[1]
    name: str
    seed: int
    grid: Optional[GridSpec] = None
    function: Optional[FunctionSpec] = None
    fields: dict[str, FunctionSpec] = {}
    pipeline: list[Stage] = Field(min_length=1)
    outputs: list[OutputSpec] = []
