"""
Test-function families for the q-psh checkers.

- SliceSpec: a (q+1)-dimensional complex affine slice through a base point
- PluriharmonicPoly: sign * Re of a holomorphic polynomial
- Probe: quadratic viscosity test function in a unitary frame plus a pluriharmonic part
- ProbeFamily: the finite dictionary of probes a falsifier runs through
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from mqpsh.core.errors import DimensionError, InputError
from mqpsh.models.matrix import HermitianMatrix

MAX_POLY_DEGREE = 3
COEF_BOX = 2.0

DEFAULT_BETAS = (0.1, 0.5)
DEFAULT_DELTAS = (2.0, 8.0)
DEFAULT_RANDOM_FRAMES = 2


def _check_frame(frame: np.ndarray, columns: Optional[int] = None) -> np.ndarray:
    frame = np.array(frame, dtype=complex)
    if frame.ndim != 2:
        raise DimensionError(f"frame must be a matrix, got shape {frame.shape}")
    if columns is not None and frame.shape[1] != columns:
        raise DimensionError(f"frame must have {columns} columns, got {frame.shape[1]}")
    gram = frame.conj().T @ frame
    err = float(np.max(np.abs(gram - np.eye(frame.shape[1])))) if gram.size else 0.0
    if err > 1e-12:
        raise InputError(f"frame is not orthonormal (error {err:.2e})")
    frame.setflags(write=False)
    return frame


# ---------------------------------------------------------------------------
# Slices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SliceSpec:
    base: np.ndarray
    frame: np.ndarray
    ball_radius: float
    boundary_samples: int = 8

    def __post_init__(self):
        base = np.array(self.base, dtype=complex).ravel()
        frame = _check_frame(self.frame)
        if frame.shape[0] != base.size:
            raise DimensionError(f"frame has {frame.shape[0]} rows for a base in C^{base.size}")
        if frame.shape[1] > base.size or frame.shape[1] < 1:
            raise DimensionError(f"slice dimension {frame.shape[1]} must be in 1..{base.size}")
        if not self.ball_radius > 0:
            raise InputError(f"ball_radius must be > 0, got {self.ball_radius}")
        base.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "ball_radius", float(self.ball_radius))

    @classmethod
    def axis_aligned(cls, base, axes: Sequence[int], ball_radius: float, boundary_samples: int = 8) -> "SliceSpec":
        base = np.asarray(base, dtype=complex).ravel()
        frame = np.zeros((base.size, len(axes)), dtype=complex)
        for col, axis in enumerate(axes):
            frame[axis, col] = 1.0
        return cls(base, frame, ball_radius, boundary_samples)

    @property
    def n(self) -> int:
        return self.base.size

    @property
    def dim(self) -> int:
        """Complex dimension q+1 of the slice."""
        return self.frame.shape[1]

    def axes(self) -> Optional[list[int]]:
        """Parent complex axes when the frame is a column selection of the identity."""
        out = []
        for col in range(self.dim):
            column = self.frame[:, col]
            hits = np.flatnonzero(np.abs(column) > 0)
            if hits.size != 1 or column[hits[0]] != 1:
                return None
            out.append(int(hits[0]))
        return out

    def to_ambient(self, w: np.ndarray) -> np.ndarray:
        """Slice coordinates (..., q+1) to ambient complex points (..., n)."""
        return self.base + np.asarray(w, dtype=complex) @ self.frame.T


def diagonal_column(n: int, j: int, k: int, phase: complex) -> np.ndarray:
    """(e_j + phase e_k) / sqrt(2)"""
    column = np.zeros(n, dtype=complex)
    column[j] = 1.0
    column[k] = phase
    return column / np.sqrt(2.0)


def slice_frames(n: int, m: int, rotated: bool = True) -> list[np.ndarray]:
    """
    n x m frames of the default slices: every choice of m coordinate axes,
    then (for m < n) frames whose first column is (e_j + phase e_k)/sqrt(2)
    with phase in {1, -1, i, -i}, completed by m-1 coordinate axes.
    """
    frames = []
    for axes in itertools.combinations(range(n), m):
        frame = np.zeros((n, m), dtype=complex)
        for col, axis in enumerate(axes):
            frame[axis, col] = 1.0
        frames.append(frame)
    if not rotated or m >= n:
        return frames
    for j, k in itertools.combinations(range(n), 2):
        rest = [a for a in range(n) if a not in (j, k)]
        for phase in (1.0, -1.0, 1j, -1j):
            for others in itertools.combinations(rest, m - 1):
                frame = np.zeros((n, m), dtype=complex)
                frame[:, 0] = diagonal_column(n, j, k, phase)
                for col, axis in enumerate(others, start=1):
                    frame[axis, col] = 1.0
                frames.append(frame)
    return frames


# ---------------------------------------------------------------------------
# Pluriharmonic polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PluriharmonicPoly:
    """sign * Re(sum of coef * z^alpha)"""

    dim: int
    terms: tuple[tuple[tuple[int, ...], complex], ...] = ()
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InputError(f"sign must be +1 or -1, got {self.sign}")
        cleaned = []
        for exponents, coef in self.terms:
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != self.dim or min(exponents, default=0) < 0:
                raise InputError(f"bad exponent vector {exponents} for C^{self.dim}")
            cleaned.append((exponents, complex(coef)))
        object.__setattr__(self, "terms", tuple(cleaned))
        if self.degree > MAX_POLY_DEGREE:
            raise InputError(f"degree {self.degree} exceeds the cap {MAX_POLY_DEGREE}")

    @classmethod
    def zero(cls, dim: int) -> "PluriharmonicPoly":
        return cls(dim)

    @classmethod
    def linear(cls, coefs: Sequence[complex], sign: int = 1) -> "PluriharmonicPoly":
        dim = len(coefs)
        terms = []
        for k, c in enumerate(coefs):
            if c != 0:
                exps = [0] * dim
                exps[k] = 1
                terms.append((tuple(exps), complex(c)))
        return cls(dim, tuple(terms), sign)

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, degree_cap: int = MAX_POLY_DEGREE, coef_box: float = COEF_BOX) -> "PluriharmonicPoly":
        monomials = [e for e in _exponents_up_to(dim, degree_cap) if sum(e) >= 1]
        count = int(rng.integers(1, 4))
        picks = rng.choice(len(monomials), size=min(count, len(monomials)), replace=False)
        terms = []
        for p in sorted(int(i) for i in picks):
            coef = complex(rng.uniform(-coef_box, coef_box), rng.uniform(-coef_box, coef_box))
            terms.append((monomials[p], coef))
        sign = 1 if rng.random() < 0.5 else -1
        return cls(dim, tuple(terms), sign)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for _, c in self.terms)

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.dim:
            raise DimensionError(f"polynomial on C^{self.dim} evaluated at points in C^{z.shape[-1]}")
        total = np.zeros(z.shape[:-1], dtype=complex)
        for exponents, coef in self.terms:
            mono = np.ones(z.shape[:-1], dtype=complex)
            for k, e in enumerate(exponents):
                if e:
                    mono = mono * z[..., k] ** e
            total = total + coef * mono
        return self.sign * total.real

    def describe(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for exponents, coef in self.terms:
            mono = "*".join(
                f"z{k + 1}" if e == 1 else f"z{k + 1}^{e}"
                for k, e in enumerate(exponents) if e
            )
            parts.append(f"({coef.real:g}{coef.imag:+g}i)*{mono}")
        prefix = "" if self.sign > 0 else "-"
        return f"{prefix}Re[{' + '.join(parts)}]"


def _exponents_up_to(dim: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(dim), total):
            exps = [0] * dim
            for k in combo:
                exps[k] += 1
            out.append(tuple(exps))
    return out


def canonical_polys(dim: int) -> list[PluriharmonicPoly]:
    """Zero, plus +-Re(c z_k) and +-Re(c z_k z_l) for c in {1, i}."""
    pool = [PluriharmonicPoly.zero(dim)]
    monomials = [e for e in _exponents_up_to(dim, 2) if sum(e) >= 1]
    for exps in monomials:
        for coef in (1.0, 1j):
            for sign in (1, -1):
                pool.append(PluriharmonicPoly(dim, ((exps, coef),), sign))
    return pool


def random_polys(dim: int, count: int, seed: int, degree_cap: int = MAX_POLY_DEGREE, coef_box: float = COEF_BOX) -> list[PluriharmonicPoly]:
    rng = np.random.default_rng(seed)
    return [PluriharmonicPoly.random(dim, rng, degree_cap, coef_box) for _ in range(count)]


def default_poly_pool(dim: int, seed: int = 0, random_count: int = 4) -> list[PluriharmonicPoly]:
    return canonical_polys(dim) + random_polys(dim, random_count, seed)


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Probe:
    """
    phi(z) = sum_k d_k |(U^T (z - c))_k|^2 + p(z - c) around a centre c.

    Its complex Hessian is U diag(d) U* everywhere.
    """

    frame: np.ndarray
    curvatures: np.ndarray
    poly: PluriharmonicPoly
    label: str = ""

    def __post_init__(self):
        frame = _check_frame(self.frame)
        curv = np.array(self.curvatures, dtype=float).ravel()
        if frame.shape != (curv.size, curv.size):
            raise DimensionError("frame must be square and match the curvature count")
        if self.poly.dim != curv.size:
            raise DimensionError("polynomial dimension does not match the probe")
        curv.setflags(write=False)
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "curvatures", curv)

    @property
    def n(self) -> int:
        return self.curvatures.size

    @property
    def hessian(self) -> HermitianMatrix:
        return HermitianMatrix((self.frame * self.curvatures) @ self.frame.conj().T)

    def evaluate(self, z: np.ndarray, centre=None) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        v = z if centre is None else z - np.asarray(centre, dtype=complex)
        w = v @ self.frame
        quad = np.sum(self.curvatures * (w.real ** 2 + w.imag ** 2), axis=-1)
        return quad + self.poly.evaluate(v)


def permutation_frames(n: int) -> list[np.ndarray]:
    """All coordinate permutations for n <= 3, cyclic shifts beyond."""
    if n <= 3:
        orders = list(itertools.permutations(range(n)))
    else:
        orders = [tuple((k + s) % n for k in range(n)) for s in range(n)]
    frames = []
    for order in orders:
        frame = np.zeros((n, n), dtype=complex)
        for col, axis in enumerate(order):
            frame[axis, col] = 1.0
        frames.append(frame)
    return frames


def rotation_frames(n: int) -> list[np.ndarray]:
    """
    Unitary frames mixing two coordinates: columns j, k of the identity
    become (e_j +- phase e_k)/sqrt(2) for phase in {1, i}, then the columns
    are reordered like permutation_frames (cyclic shifts from n = 3 on).
    """
    if n < 2:
        return []
    if n == 2:
        orders = list(itertools.permutations(range(n)))
    else:
        orders = [tuple((k + s) % n for k in range(n)) for s in range(n)]
    frames = []
    for j, k in itertools.combinations(range(n), 2):
        for phase in (1.0, 1j):
            base = np.eye(n, dtype=complex)
            base[:, j] = diagonal_column(n, j, k, phase)
            base[:, k] = diagonal_column(n, j, k, -phase)
            for order in orders:
                frames.append(base[:, list(order)])
    return frames


def lattice_frames(n: int, count: int, seed: int = 0) -> list[np.ndarray]:
    """
    Seeded random unitary frames whose first column is a normalized Gaussian
    integer vector with real and imaginary parts in {-1, 0, 1}, at least two
    nonzero entries and entries of both moduli 1 and sqrt(2). The real span
    of that column and i times it is spanned by grid-stencil directions.
    """
    if n < 2 or count <= 0:
        return []
    rng = np.random.default_rng(seed)
    frames = []
    while len(frames) < count:
        v = rng.integers(-1, 2, size=n) + 1j * rng.integers(-1, 2, size=n)
        moduli = np.abs(v[v != 0])
        if moduli.size < 2 or np.ptp(moduli) < 0.1:
            continue
        fill = rng.standard_normal((n, n - 1)) + 1j * rng.standard_normal((n, n - 1))
        frame, _ = np.linalg.qr(np.column_stack([v / np.linalg.norm(v), fill]))
        frames.append(frame)
    return frames


@dataclass(frozen=True, eq=False)
class ProbeFamily:
    betas: tuple[float, ...]
    deltas: tuple[float, ...]
    poly_pool: tuple[PluriharmonicPoly, ...]
    frames: tuple[np.ndarray, ...]
    include_touching: bool = True

    def __post_init__(self):
        betas = tuple(float(b) for b in self.betas)
        deltas = tuple(float(d) for d in self.deltas)
        if not betas or min(betas) <= 0:
            raise InputError("betas must be non-empty and strictly positive")
        if not deltas or min(deltas) <= 0:
            raise InputError("deltas must be non-empty and strictly positive")
        if not self.frames:
            raise InputError("at least one frame is required")
        frames = tuple(_check_frame(f) for f in self.frames)
        n = frames[0].shape[0]
        if any(f.shape != (n, n) for f in frames):
            raise DimensionError("all frames must be n x n")
        pool = tuple(self.poly_pool) or (PluriharmonicPoly.zero(n),)
        if any(p.dim != n for p in pool):
            raise DimensionError("polynomial pool dimension does not match the frames")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "deltas", deltas)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "poly_pool", pool)

    @classmethod
    def default(
        cls,
        n: int,
        seed: int = 0,
        random_frames: int = DEFAULT_RANDOM_FRAMES,
        random_polys_count: int = 4,
        betas: Sequence[float] = DEFAULT_BETAS,
        deltas: Sequence[float] = DEFAULT_DELTAS,
        haar_frames: int = 0,
        include_touching: bool = True,
    ) -> "ProbeFamily":
        """
        Permutation and two-coordinate rotation frames, `random_frames` seeded
        Gaussian-integer frames and `haar_frames` Haar-random unitaries.
        """
        frames = permutation_frames(n) + rotation_frames(n) + lattice_frames(n, random_frames, seed)
        if haar_frames and n > 1:
            rng = np.random.default_rng(seed)
            frames.extend(np.atleast_2d(unitary_group.rvs(n, random_state=rng)) for _ in range(haar_frames))
        pool = default_poly_pool(n, seed, random_polys_count)
        return cls(tuple(betas), tuple(deltas), tuple(pool), tuple(frames), include_touching)

    @property
    def n(self) -> int:
        return self.frames[0].shape[0]

    def quadratic_parts(self) -> list[tuple[np.ndarray, np.ndarray, str]]:
        """
        Distinct (frame, curvatures) pairs: m curvatures -beta followed by
        n-m curvatures +delta, for m = 0..n (m = 0 only when touching probes
        are included).
        """
        n = self.n
        seen = set()
        out = []
        first_m = 0 if self.include_touching else 1
        for f_idx, frame in enumerate(self.frames):
            for m in range(first_m, n + 1):
                betas = self.betas if m > 0 else (None,)
                deltas = self.deltas if m < n else (None,)
                for beta in betas:
                    for delta in deltas:
                        curv = np.array(([-beta] * m if m else []) + ([delta] * (n - m) if m < n else []), dtype=float)
                        matrix = (frame * curv) @ frame.conj().T
                        key = (np.round(matrix, 12) + 0.0).tobytes()
                        if key in seen:
                            continue
                        seen.add(key)
                        label = f"frame{f_idx}:m={m}"
                        if beta is not None:
                            label += f":beta={beta:g}"
                        if delta is not None:
                            label += f":delta={delta:g}"
                        out.append((frame, curv, label))
        return out

    def probes(self) -> list[Probe]:
        out = []
        for frame, curv, label in self.quadratic_parts():
            for p_idx, poly in enumerate(self.poly_pool):
                out.append(Probe(frame, curv, poly, f"{label}:poly{p_idx}"))
        return out
