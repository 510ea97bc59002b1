from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field

from mqpsh.models.matrix import InertiaSignature
from mqpsh.models.probe import PluriharmonicPoly, Probe


def _pairs(a: np.ndarray) -> list:
    return np.stack([np.real(a), np.imag(a)], axis=-1).tolist()


def _from_pairs(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


class TermSpec(BaseModel):
    exponents: list[int]
    re: float
    im: float = 0.0


class PolySpec(BaseModel):
    dim: int
    terms: list[TermSpec] = []
    sign: Literal[1, -1] = 1

    @classmethod
    def from_poly(cls, poly: PluriharmonicPoly) -> "PolySpec":
        return cls(
            dim=poly.dim,
            terms=[TermSpec(exponents=list(e), re=c.real, im=c.imag) for e, c in poly.terms],
            sign=poly.sign,
        )

    def to_poly(self) -> PluriharmonicPoly:
        terms = tuple((tuple(t.exponents), complex(t.re, t.im)) for t in self.terms)
        return PluriharmonicPoly(self.dim, terms, self.sign)


class ProbeSpec(BaseModel):
    frame: list[list[list[float]]]
    curvatures: list[float]
    poly: PolySpec
    label: str = ""

    @classmethod
    def from_probe(cls, probe: Probe) -> "ProbeSpec":
        return cls(
            frame=_pairs(probe.frame),
            curvatures=probe.curvatures.tolist(),
            poly=PolySpec.from_poly(probe.poly),
            label=probe.label,
        )

    def to_probe(self) -> Probe:
        return Probe(_from_pairs(self.frame), np.asarray(self.curvatures), self.poly.to_poly(), self.label)


class ViscosityWitness(BaseModel):
    kind: Literal["viscosity"] = "viscosity"
    probe: ProbeSpec
    centre_index: int
    point_index: int
    point: list[float]
    inertia: InertiaSignature
    gap: float


class ClassicalWitness(BaseModel):
    kind: Literal["classical"] = "classical"
    slice_index: int
    base: list[list[float]]
    frame: list[list[list[float]]]
    ball_radius: float
    poly: PolySpec
    core_max: float
    band_max: float

    @property
    def gap(self) -> float:
        return self.core_max - self.band_max


Witness = Annotated[Union[ViscosityWitness, ClassicalWitness], Field(discriminator="kind")]


class TouchPoint(BaseModel):
    centre_index: int
    point_index: int
    probe_label: str
    negative: int
    positive: int


class QpshVerdict(BaseModel):
    status: Literal["PASS", "FAIL"]
    checker: str
    q: int
    witness: Optional[Witness] = None
    note: Optional[str] = None
    checked: int = 0
    touch_points: list[TouchPoint] = []

    @property
    def passed(self) -> bool:
        return self.status == "PASS"


class VerdictSet(BaseModel):
    """Verdicts of one qpsh_check stage, keyed by checker."""

    q: int
    verdicts: dict[str, QpshVerdict]
