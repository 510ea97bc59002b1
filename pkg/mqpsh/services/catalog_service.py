"""
Built-in pointwise functions on C^n.

Every entry maps a complex array (..., n) to a real array (...), returns
-inf for NEG_INF, and declares whether it is C^2 (so the smooth checker
applies) and its parameters as a pydantic model.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Type

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from mqpsh.core.errors import ConfigError, DimensionError
from mqpsh.models.grid import NEG_INF
from mqpsh.schemas.verdict import PolySpec, TermSpec

PointwiseFn = Callable[[np.ndarray], np.ndarray]


class NoParams(BaseModel):
    pass


class CoordinateParams(BaseModel):
    k: int = Field(1, ge=1, description="complex coordinate (1-based)")


class PolyParams(BaseModel):
    poly: Optional[PolySpec] = Field(None, description="holomorphic polynomial; default Re(z1^2)")


class CharParams(BaseModel):
    radius: float = Field(0.5, gt=0, description="radius of the closed ball X")
    center: Optional[list[float]] = Field(None, description="real coordinates of the centre; default origin")


def _need(z: np.ndarray, dim: int, name: str):
    if z.shape[-1] < dim:
        raise DimensionError(f"{name} needs complex dimension >= {dim}, got {z.shape[-1]}")


def _normsq(z: np.ndarray) -> np.ndarray:
    return np.sum(z.real ** 2 + z.imag ** 2, axis=-1)


def _coordinate(params: CoordinateParams, name: str):
    def pick(z):
        _need(z, params.k, name)
        return z[..., params.k - 1]
    return pick


def _build_normsq(_: NoParams) -> PointwiseFn:
    return _normsq


def _build_neg_normsq(_: NoParams) -> PointwiseFn:
    return lambda z: -_normsq(z)


def _build_saddle_q1(_: NoParams) -> PointwiseFn:
    def f(z):
        _need(z, 2, "saddle_q1")
        return np.abs(z[..., 0]) ** 2 - np.abs(z[..., 1]) ** 2
    return f


def _build_rotated_saddle(_: NoParams) -> PointwiseFn:
    def f(z):
        _need(z, 2, "rotated_saddle")
        return np.abs(z[..., 0]) ** 2 + np.abs(z[..., 1]) ** 2 - 3.0 * (z[..., 0] * np.conj(z[..., 1])).real
    return f


def _build_pluriharmonic(params: PolyParams) -> PointwiseFn:
    spec = params.poly

    def f(z):
        n = z.shape[-1]
        if spec is None:
            exps = [2] + [0] * (n - 1)
            poly = PolySpec(dim=n, terms=[TermSpec(exponents=exps, re=1.0)]).to_poly()
        else:
            poly = spec.to_poly()
        return poly.evaluate(z)
    return f


def _build_im4(params: CoordinateParams) -> PointwiseFn:
    coord = _coordinate(params, "im4")
    return lambda z: coord(z).imag ** 4


def _build_im4_abs(params: CoordinateParams) -> PointwiseFn:
    coord = _coordinate(params, "im4_abs")

    def f(z):
        y = coord(z).imag
        return y ** 4 + np.abs(y)
    return f


def _build_char(params: CharParams) -> PointwiseFn:
    r2 = params.radius * params.radius * (1 + 1e-12)

    def f(z):
        pts = np.concatenate([z.real, z.imag], axis=-1)
        c = np.zeros(pts.shape[-1]) if params.center is None else np.asarray(params.center, dtype=float)
        if c.size != pts.shape[-1]:
            raise DimensionError(f"char centre has {c.size} coordinates, expected {pts.shape[-1]}")
        d = pts - c
        return np.where(np.sum(d * d, axis=-1) <= r2, 0.0, NEG_INF)
    return f


def _build_neg_z1sq(_: NoParams) -> PointwiseFn:
    return lambda z: -np.abs(z[..., 0]) ** 2


def _build_neg_abs_re(_: NoParams) -> PointwiseFn:
    return lambda z: -np.abs(z[..., 0].real)


def _build_max_re(_: NoParams) -> PointwiseFn:
    return lambda z: np.max(z.real, axis=-1)


def _build_log1p_normsq(_: NoParams) -> PointwiseFn:
    return lambda z: np.log1p(_normsq(z))


def _build_exp_re(_: NoParams) -> PointwiseFn:
    return lambda z: np.exp(z[..., 0].real)


def _eye_hessian(scale: float):
    return lambda z: scale * np.eye(z.shape[-1], dtype=complex)


def _unit_hessian(index: int, value: Callable[[np.ndarray], float]):
    def hess(z):
        out = np.zeros((z.shape[-1], z.shape[-1]), dtype=complex)
        out[index, index] = value(z)
        return out
    return hess


def _hess_normsq(_: NoParams):
    return _eye_hessian(1.0)


def _hess_neg_normsq(_: NoParams):
    return _eye_hessian(-1.0)


def _hess_saddle_q1(_: NoParams):
    def hess(z):
        out = np.zeros((z.shape[-1], z.shape[-1]), dtype=complex)
        out[0, 0], out[1, 1] = 1.0, -1.0
        return out
    return hess


def _hess_rotated_saddle(_: NoParams):
    def hess(z):
        out = np.eye(z.shape[-1], dtype=complex)
        out[0, 1] = out[1, 0] = -1.5
        return out
    return hess


def _hess_pluriharmonic(_: PolyParams):
    return _eye_hessian(0.0)


def _hess_im4(params: CoordinateParams):
    k = params.k - 1
    return _unit_hessian(k, lambda z: 3.0 * z[k].imag ** 2)


def _hess_neg_z1sq(_: NoParams):
    return _unit_hessian(0, lambda z: -1.0)


def _hess_log1p_normsq(_: NoParams):
    def hess(z):
        s = 1.0 + float(np.sum(np.abs(z) ** 2))
        return np.eye(z.size, dtype=complex) / s - np.outer(z.conj(), z) / (s * s)
    return hess


def _hess_exp_re(_: NoParams):
    return _unit_hessian(0, lambda z: 0.25 * np.exp(z[0].real))


HessianFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    formula: str
    source: str
    smooth: bool
    params: Type[BaseModel]
    builder: Callable[[BaseModel], PointwiseFn]
    hessian: Optional[Callable[[BaseModel], HessianFn]] = None

    def schema(self) -> dict:
        out = {}
        for key, info in self.params.model_fields.items():
            out[key] = info.description or str(info.annotation)
        return out


ENTRIES = [
    CatalogEntry("normsq", "|z|^2", "strictly psh model function", True, NoParams, _build_normsq, _hess_normsq),
    CatalogEntry("neg_normsq", "-|z|^2", "only n-psh", True, NoParams, _build_neg_normsq, _hess_neg_normsq),
    CatalogEntry("saddle_q1", "|z1|^2 - |z2|^2", "complex Hessian diag(1, -1): 1-psh", True, NoParams, _build_saddle_q1, _hess_saddle_q1),
    CatalogEntry("rotated_saddle", "|z|^2 - 3 Re(z1 conj(z2))", "complex Hessian eigenvalues -1/2, 5/2 along (e1 +- e2)/sqrt(2): 1-psh", True, NoParams, _build_rotated_saddle, _hess_rotated_saddle),
    CatalogEntry("pluriharmonic", "Re p(z)", "real part of a holomorphic polynomial", True, PolyParams, _build_pluriharmonic, _hess_pluriharmonic),
    CatalogEntry("im4", "Im(z_k)^4", "psh, strictly psh off the real axis, complex Hessian 3 Im^2", True, CoordinateParams, _build_im4, _hess_im4),
    CatalogEntry("im4_abs", "Im(z_k)^4 + |Im(z_k)|", "psh, not strictly psh on the real axis", False, CoordinateParams, _build_im4_abs),
    CatalogEntry("char", "0 on a closed ball X, -inf elsewhere", "characteristic function of X", False, CharParams, _build_char),
    CatalogEntry("neg_z1sq", "-|z1|^2", "1-psh, not psh", True, NoParams, _build_neg_z1sq, _hess_neg_z1sq),
    CatalogEntry("neg_abs_re", "-|Re z1|", "min of two pluriharmonic functions: 1-psh", False, NoParams, _build_neg_abs_re),
    CatalogEntry("max_re", "max_k Re z_k", "max of pluriharmonic functions: psh", False, NoParams, _build_max_re),
    CatalogEntry("log1p_normsq", "log(1 + |z|^2)", "psh", True, NoParams, _build_log1p_normsq, _hess_log1p_normsq),
    CatalogEntry("exp_re", "exp(Re z1)", "psh", True, NoParams, _build_exp_re, _hess_exp_re),
]


@dataclass(frozen=True)
class CatalogFunction:
    """A built catalog entry; `hessian` maps one point of C^n to its exact complex Hessian."""

    name: str
    fn: PointwiseFn
    smooth: bool
    hessian: Optional[HessianFn] = None

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.fn(np.asarray(z, dtype=complex))


class CatalogService:

    def __init__(self, entries: list[CatalogEntry]):
        self._entries = {e.name: e for e in entries}

    def names(self) -> list[str]:
        return sorted(self._entries)

    def get(self, name: str) -> CatalogEntry:
        try:
            return self._entries[name]
        except KeyError:
            raise ConfigError(f"unknown catalog function {name!r}", location="function.catalog") from None

    def build(self, name: str, params: Optional[dict] = None) -> CatalogFunction:
        entry = self.get(name)
        try:
            parsed = entry.params.model_validate(params or {})
        except ValidationError as exc:
            raise ConfigError(str(exc), location=f"function.params ({name})") from exc
        hessian = entry.hessian(parsed) if entry.hessian is not None else None
        return CatalogFunction(name, entry.builder(parsed), entry.smooth, hessian)

    def catalog_list(self) -> str:
        lines = []
        for name in self.names():
            entry = self._entries[name]
            schema = entry.schema()
            params = ", ".join(f"{k}: {v}" for k, v in schema.items()) or "-"
            smooth = "C2" if entry.smooth else "nonsmooth"
            lines.append(f"{name:<15} {entry.formula:<32} [{smooth}] {entry.source}  params: {params}")
        return "\n".join(lines)


catalog_service = CatalogService(ENTRIES)
