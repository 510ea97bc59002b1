from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from mqpsh.core.config import settings
from mqpsh.core.errors import InputError


@dataclass(frozen=True, eq=False)
class Stencil:
    """
    Central second-order finite-difference stencil.

    `domain` is an optional (lo, hi) pair of real-coordinate bounds the
    evaluation points must stay inside.
    """

    step: np.ndarray
    scheme: str = "central"
    domain: Optional[tuple[np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        step = np.array(self.step, dtype=float).ravel()
        if step.size == 0 or not np.all(np.isfinite(step)) or np.any(step <= 0):
            raise InputError(f"stencil steps must be finite and > 0, got {step.tolist()}")
        if self.scheme != "central":
            raise InputError(f"unsupported stencil scheme {self.scheme!r}")
        step.setflags(write=False)
        object.__setattr__(self, "step", step)
        if self.domain is not None:
            lo, hi = (np.asarray(b, dtype=float) for b in self.domain)
            object.__setattr__(self, "domain", (lo, hi))

    @classmethod
    def uniform(cls, h: float, real_dim: int, domain=None) -> "Stencil":
        return cls(np.full(real_dim, float(h)), domain=domain)

    @classmethod
    def default_for(cls, x, domain=None) -> "Stencil":
        """h = FD_STEP_SCALE * (1 + |x|_inf) on every axis."""
        x = np.asarray(x, dtype=float).ravel()
        h = settings.FD_STEP_SCALE * (1.0 + float(np.max(np.abs(x))))
        return cls.uniform(h, x.size, domain=domain)

    @property
    def real_dim(self) -> int:
        return self.step.size

    def halved(self) -> "Stencil":
        return Stencil(self.step / 2.0, self.scheme, self.domain)

    def check_inside(self, x: np.ndarray):
        if self.domain is None:
            return
        lo, hi = self.domain
        if np.any(x - self.step < lo - 1e-15) or np.any(x + self.step > hi + 1e-15):
            raise InputError(f"stencil at {x.tolist()} leaves the domain box")
