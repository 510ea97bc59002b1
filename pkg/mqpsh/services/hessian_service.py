"""
Finite-difference Hessians.

Real coordinates are ordered (x_1..x_n, y_1..y_n). The complex Hessian is
read off the real one as

    H^C = 1/4 [(Hxx + Hyy) + i (Hxy - Hyx)]
"""

from typing import Callable, Optional

import numpy as np

from mqpsh.core.config import settings
from mqpsh.core.errors import DimensionError, NonSmoothPointError
from mqpsh.core.logger import logger
from mqpsh.models.grid import to_complex, to_real
from mqpsh.models.matrix import HermitianMatrix
from mqpsh.models.stencil import Stencil

PointwiseFn = Callable[[np.ndarray], np.ndarray]


def _offsets(d: int) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Unit offsets of the central stencil: centre, +-e_i, then +-e_i +-e_j for i < j."""
    rows = [np.zeros(d)]
    for i in range(d):
        for s in (1.0, -1.0):
            e = np.zeros(d)
            e[i] = s
            rows.append(e)
    pairs = []
    for i in range(d):
        for j in range(i + 1, d):
            pairs.append((i, j))
            for si, sj in ((1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)):
                e = np.zeros(d)
                e[i] = si
                e[j] = sj
                rows.append(e)
    return np.array(rows), pairs


class HessianService:

    def __init__(self, kink_ratio: float):
        self.kink_ratio = kink_ratio

    def _raw_hessians(self, f: PointwiseFn, x: np.ndarray, h: np.ndarray) -> np.ndarray:
        n_pts, d = x.shape
        unit, pairs = _offsets(d)
        pts = x[:, None, :] + unit[None, :, :] * h[:, None, :]
        vals = np.asarray(f(to_complex(pts)), dtype=float)

        bad = ~np.isfinite(vals)
        if bad.any():
            node = int(np.flatnonzero(bad.any(axis=1))[0])
            raise NonSmoothPointError(
                "stencil touches a non-finite value",
                point=x[node].tolist(),
                node=node,
            )

        H = np.empty((n_pts, d, d))
        centre = vals[:, 0]
        for i in range(d):
            plus, minus = vals[:, 1 + 2 * i], vals[:, 2 + 2 * i]
            H[:, i, i] = (plus - 2.0 * centre + minus) / (h[:, i] * h[:, i])
        base = 1 + 2 * d
        for k, (i, j) in enumerate(pairs):
            pp, pm, mp, mm = (vals[:, base + 4 * k + s] for s in range(4))
            H[:, i, j] = H[:, j, i] = (pp - pm - mp + mm) / (4.0 * h[:, i] * h[:, j])
        return H

    def real_hessians(
        self,
        f: PointwiseFn,
        x: np.ndarray,
        stencil: Optional[Stencil] = None,
        detect_kinks: bool = True,
    ) -> np.ndarray:
        """Batch of real Hessians at points x of shape (N, 2n)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d = x.shape[1]
        if d % 2:
            raise DimensionError(f"real dimension must be even, got {d}")
        if stencil is None:
            scale = 1.0 + np.max(np.abs(x), axis=1, keepdims=True)
            h = settings.FD_STEP_SCALE * np.repeat(scale, d, axis=1)
        else:
            if stencil.real_dim != d:
                raise DimensionError(f"stencil has {stencil.real_dim} axes for points in R^{d}")
            for row in x:
                stencil.check_inside(row)
            h = np.broadcast_to(stencil.step, x.shape).copy()

        H = self._raw_hessians(f, x, h)
        if detect_kinks:
            H2 = self._raw_hessians(f, x, h / 2.0)
            gap = np.max(np.abs(H - H2), axis=(1, 2))
            scale = 1.0 + np.max(np.abs(H2), axis=(1, 2))
            kinked = gap > self.kink_ratio * scale
            if kinked.any():
                node = int(np.flatnonzero(kinked)[0])
                logger.info("hessian_kink_detected", point=x[node].tolist(), gap=float(gap[node]))
                raise NonSmoothPointError("finite differences do not settle under step halving (kink)", point=x[node].tolist(), node=node)
        return H

    def real_hessian(self, f: PointwiseFn, x, stencil: Optional[Stencil] = None, detect_kinks: bool = True) -> np.ndarray:
        return self.real_hessians(f, np.asarray(x, dtype=float)[None, :], stencil, detect_kinks)[0]

    @staticmethod
    def real_to_complex_array(H: np.ndarray) -> np.ndarray:
        H = np.asarray(H, dtype=float)
        d = H.shape[-1]
        if H.shape[-2] != d or d % 2:
            raise DimensionError(f"expected a square matrix of even size, got shape {H.shape}")
        H = 0.5 * (H + np.swapaxes(H, -1, -2))
        n = d // 2
        hxx, hxy = H[..., :n, :n], H[..., :n, n:]
        hyx, hyy = H[..., n:, :n], H[..., n:, n:]
        return 0.25 * ((hxx + hyy) + 1j * (hxy - hyx))

    def real_to_complex_hessian(self, H: np.ndarray) -> HermitianMatrix:
        return HermitianMatrix(self.real_to_complex_array(H))

    def complex_hessian(self, f: PointwiseFn, z, stencil: Optional[Stencil] = None, detect_kinks: bool = True) -> HermitianMatrix:
        x = to_real(np.asarray(z, dtype=complex).ravel())
        return self.real_to_complex_hessian(self.real_hessian(f, x, stencil, detect_kinks))

    def complex_hessians(self, f: PointwiseFn, z: np.ndarray, stencil: Optional[Stencil] = None, detect_kinks: bool = True) -> np.ndarray:
        """Batch form: complex points (N, n) to an array of Hermitian matrices (N, n, n)."""
        x = to_real(np.atleast_2d(np.asarray(z, dtype=complex)))
        return self.real_to_complex_array(self.real_hessians(f, x, stencil, detect_kinks))


hessian_service = HessianService(kink_ratio=settings.KINK_RATIO)
