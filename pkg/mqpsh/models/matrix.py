from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from mqpsh.core.config import settings
from mqpsh.core.errors import DimensionError, InputError


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """
    n x n complex Hermitian matrix, stored exactly Hermitian.

    Entries may deviate from Hermitian by HERMITIAN_ATOL * max(1, max |a_ij|)
    (rounding in products); the stored matrix is (A + A*)/2. Anything further
    off is rejected.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DimensionError(f"expected a square matrix, got shape {a.shape}")
        if not np.isfinite(a).all():
            raise InputError("matrix entries must be finite")
        deviation = float(np.max(np.abs(a - a.conj().T)))
        allowed = settings.HERMITIAN_ATOL * max(1.0, float(np.max(np.abs(a))))
        if deviation > allowed:
            raise InputError(f"matrix is not Hermitian: deviation {deviation:.3e} > {allowed:.1e}")
        a = 0.5 * (a + a.conj().T)
        a[np.diag_indices_from(a)] = a.diagonal().real
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def from_array(cls, a, atol: float | None = None) -> "HermitianMatrix":
        """Symmetrize (A + A*)/2 after checking the deviation is within an absolute atol."""
        atol = settings.HERMITIAN_ATOL if atol is None else atol
        arr = np.asarray(a, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {arr.shape}")
        deviation = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
        if deviation > atol:
            raise InputError(f"matrix is not Hermitian: deviation {deviation:.3e} > {atol:.1e}")
        return cls(0.5 * (arr + arr.conj().T))

    @classmethod
    def identity(cls, n: int) -> "HermitianMatrix":
        return cls(np.eye(n, dtype=complex))

    @classmethod
    def zeros(cls, n: int) -> "HermitianMatrix":
        return cls(np.zeros((n, n), dtype=complex))

    @classmethod
    def diag(cls, values: Sequence[float]) -> "HermitianMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)).astype(complex))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def default_tol(self) -> float:
        return settings.EIG_TOL_SCALE * max(1.0, self.frobenius_norm)

    def _check_dim(self, other: "HermitianMatrix"):
        if other.n != self.n:
            raise DimensionError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        self._check_dim(other)
        return HermitianMatrix(self.entries + other.entries)

    def __sub__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        self._check_dim(other)
        return HermitianMatrix(self.entries - other.entries)

    def __neg__(self) -> "HermitianMatrix":
        return HermitianMatrix(-self.entries)

    def scaled(self, c: float) -> "HermitianMatrix":
        return HermitianMatrix(float(c) * self.entries)

    def congruence(self, c) -> "HermitianMatrix":
        """C A C*"""
        c = np.asarray(c, dtype=complex)
        return HermitianMatrix(c @ self.entries @ c.conj().T)

    def quadratic_form(self, xi) -> np.ndarray:
        """xi* A xi, vectorized over leading axes of xi."""
        xi = np.asarray(xi, dtype=complex)
        return np.einsum("...k,kl,...l->...", xi.conj(), self.entries, xi).real

    def form(self, y) -> np.ndarray:
        """y^t A conj(y), the quadratic function whose complex Hessian is A."""
        y = np.asarray(y, dtype=complex)
        return np.einsum("...k,kl,...l->...", y, self.entries, y.conj()).real

    def allclose(self, other: "HermitianMatrix", atol: float = 1e-12) -> bool:
        return self.n == other.n and bool(np.allclose(self.entries, other.entries, atol=atol, rtol=0))

    def to_pairs(self) -> list[list[list[float]]]:
        return [[[float(v.real), float(v.imag)] for v in row] for row in self.entries]


class InertiaSignature(BaseModel):
    """(negative, zero, positive) eigenvalue counts under an absolute threshold."""

    model_config = ConfigDict(frozen=True)

    negative: int
    zero: int
    positive: int
    tol: float

    @model_validator(mode="after")
    def _non_negative(self):
        if min(self.negative, self.zero, self.positive) < 0 or self.tol < 0:
            raise ValueError("counts and tol must be non-negative")
        return self

    @property
    def n(self) -> int:
        return self.negative + self.zero + self.positive

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.negative, self.zero, self.positive)
