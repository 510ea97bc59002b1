from mqpsh.models.grid import (
    NEG_INF,
    BoxGrid,
    ScalarField,
    ext_add,
    ext_max,
    ext_min,
    ext_scale,
    squared_norm,
    validate_ext_real,
)
from mqpsh.models.matrix import HermitianMatrix, InertiaSignature
from mqpsh.models.stencil import Stencil
from mqpsh.models.kernel import Kernel
from mqpsh.models.envelope import EnvelopeResult
from mqpsh.models.gridset import GridSet
from mqpsh.models.probe import PluriharmonicPoly, Probe, ProbeFamily, SliceSpec

__all__ = [
    "NEG_INF",
    "BoxGrid",
    "ScalarField",
    "ext_add",
    "ext_max",
    "ext_min",
    "ext_scale",
    "squared_norm",
    "validate_ext_real",
    "HermitianMatrix",
    "InertiaSignature",
    "Stencil",
    "Kernel",
    "EnvelopeResult",
    "GridSet",
    "PluriharmonicPoly",
    "Probe",
    "ProbeFamily",
    "SliceSpec",
]
