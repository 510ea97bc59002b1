"""
Hermitian matrix algebra.

- eigenvalues: classical complex Jacobi rotations, largest pivot first
- inertia: the (negative, zero, positive) counts under a zero threshold
- Loewner order and the degenerate-ellipticity check of the inertia operators
- library oracles: characteristic-polynomial roots and LDL* inertia
"""

from typing import Optional

import numpy as np
import scipy.linalg

from mqpsh.core.config import settings
from mqpsh.core.errors import DimensionError, PreconditionError
from mqpsh.core.logger import logger
from mqpsh.models.matrix import HermitianMatrix, InertiaSignature
from mqpsh.schemas.report import EllipticReport


class HermitianService:

    def __init__(self, jacobi_tol: float, max_sweeps: int):
        self.jacobi_tol = jacobi_tol
        self.max_sweeps = max_sweeps

    def jacobi_eigh(self, A: HermitianMatrix) -> tuple[np.ndarray, np.ndarray]:
        """
        Returns (w, V), w descending, columns of V the eigenvectors.

        Each step zeroes the largest off-diagonal a_pq = r e^{i phi} with
        U = diag(1, e^{-i phi}) on (p, q) followed by a real rotation.
        """
        a = np.array(A.entries, dtype=complex)
        n = a.shape[0]
        V = np.eye(n, dtype=complex)
        threshold = self.jacobi_tol * max(1.0, A.frobenius_norm)
        max_rotations = self.max_sweeps * n * (n - 1) // 2
        upper = np.triu_indices(n, 1)

        rotations = 0
        while n > 1 and rotations < max_rotations:
            off = np.abs(a[upper])
            k = int(np.argmax(off))
            if off[k] <= threshold:
                break
            p, q = int(upper[0][k]), int(upper[1][k])
            apq = a[p, q]
            r = abs(apq)
            phase = apq / r

            theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
            if theta >= 0.0:
                t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
            else:
                t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c

            u2 = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
            cols = [p, q]
            a[:, cols] = a[:, cols] @ u2
            a[cols, :] = u2.conj().T @ a[cols, :]
            V[:, cols] = V[:, cols] @ u2
            a[p, q] = 0.0
            a[q, p] = 0.0
            a[p, p] = a[p, p].real
            a[q, q] = a[q, q].real
            rotations += 1

        if rotations >= max_rotations and n > 1:
            logger.warning("jacobi_rotation_cap_reached", n=n, rotations=rotations)

        w = a.diagonal().real.copy()
        order = np.argsort(-w, kind="stable")
        return w[order], V[:, order]

    def eigenvalues(self, A: HermitianMatrix) -> np.ndarray:
        return self.jacobi_eigh(A)[0]

    def inertia(self, A: HermitianMatrix, tol: Optional[float] = None) -> InertiaSignature:
        tol = A.default_tol() if tol is None else float(tol)
        return self.classify(self.eigenvalues(A), tol)

    @staticmethod
    def classify(values: np.ndarray, tol: float) -> InertiaSignature:
        values = np.asarray(values, dtype=float)
        negative = int(np.count_nonzero(values < -tol))
        positive = int(np.count_nonzero(values > tol))
        return InertiaSignature(
            negative=negative,
            zero=values.size - negative - positive,
            positive=positive,
            tol=tol,
        )

    def loewner_geq(self, A: HermitianMatrix, B: HermitianMatrix, tol: Optional[float] = None) -> bool:
        if A.n != B.n:
            raise DimensionError(f"dimension mismatch: {A.n} vs {B.n}")
        diff = A - B
        tol = diff.default_tol() if tol is None else float(tol)
        return bool(self.eigenvalues(diff)[-1] >= -tol)

    def check_elliptic_degenerate(self, A: HermitianMatrix, B: HermitianMatrix, tol: Optional[float] = None) -> EllipticReport:
        if tol is None:
            tol = max(A.default_tol(), B.default_tol())
        if not self.loewner_geq(A, B, tol):
            raise PreconditionError("check_elliptic_degenerate requires A >= B in the Loewner order")

        eig_a = self.eigenvalues(A)
        eig_b = self.eigenvalues(B)
        in_a = self.classify(eig_a, tol)
        in_b = self.classify(eig_b, tol)
        shortfall = float(np.max(eig_b - eig_a))
        return EllipticReport(
            inertia_a=in_a,
            inertia_b=in_b,
            eigenvalues_a=eig_a.tolist(),
            eigenvalues_b=eig_b.tolist(),
            negative_ok=in_a.negative <= in_b.negative,
            positive_ok=in_a.positive >= in_b.positive,
            interlacing_ok=shortfall <= tol,
            max_interlacing_violation=max(0.0, shortfall),
        )

    # ---- oracles ----

    def charpoly_eigenvalues(self, A: HermitianMatrix) -> np.ndarray:
        """Roots of the Faddeev-LeVerrier characteristic polynomial, descending."""
        a = A.entries
        n = A.n
        coeffs = [1.0 + 0j]
        M = np.zeros_like(a)
        identity = np.eye(n, dtype=complex)
        for k in range(1, n + 1):
            M = a @ M + coeffs[-1] * identity
            coeffs.append(-np.trace(a @ M) / k)
        roots = np.roots(np.array(coeffs))
        return np.sort(roots.real)[::-1]

    def ldl_inertia(self, A: HermitianMatrix, tol: float = 0.0) -> InertiaSignature:
        """Inertia of the block-diagonal factor of a pivoted LDL* (Sylvester's law)."""
        _, d, _ = scipy.linalg.ldl(A.entries, lower=True, hermitian=True)
        values = []
        i = 0
        n = A.n
        while i < n:
            if i + 1 < n and d[i + 1, i] != 0:
                a, b, c = d[i, i].real, d[i + 1, i], d[i + 1, i + 1].real
                mid = 0.5 * (a + c)
                rad = np.sqrt((0.5 * (a - c)) ** 2 + abs(b) ** 2)
                values += [mid + rad, mid - rad]
                i += 2
            else:
                values.append(d[i, i].real)
                i += 1
        return self.classify(np.array(values), tol)

    # ---- generators for property suites ----

    @staticmethod
    def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> HermitianMatrix:
        x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return HermitianMatrix(scale * 0.5 * (x + x.conj().T))

    @staticmethod
    def random_psd(n: int, rng: np.random.Generator, rank: Optional[int] = None) -> HermitianMatrix:
        """C C* for a random n x rank complex C."""
        rank = n if rank is None else rank
        c = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
        return HermitianMatrix(c @ c.conj().T)


hermitian_service = HermitianService(
    jacobi_tol=settings.JACOBI_TOL,
    max_sweeps=settings.JACOBI_MAX_SWEEPS,
)
