try:
    from pydantic_settings import BaseSettings, SettingsConfigDict
except Exception:
    from pydantic import BaseSettings

import os
from functools import lru_cache
from typing import Optional
from pathlib import Path


class Settings(BaseSettings):
    PROJECT_NAME: str = "mqpsh"

    # Worker pool (0 = one worker per CPU)
    THREADS: int = 0

    # Logging
    LOG_LEVEL: str = "WARNING"
    LOG_DIR: Optional[str] = None
    LOG_JSON: bool = False

    # Hermitian algebra
    EIG_TOL_SCALE: float = 1e-10
    HERMITIAN_ATOL: float = 1e-12
    JACOBI_TOL: float = 1e-14
    JACOBI_MAX_SWEEPS: int = 64

    # Finite differences
    FD_STEP_SCALE: float = 1e-4
    KINK_RATIO: float = 0.25

    # Maximum-property margin, shared by the oracle and the falsifier
    MAX_TOL: float = 1e-9

    # Query nodes per vectorized brute-force chunk
    BRUTEFORCE_CHUNK: int = 256

    model_config = SettingsConfigDict(
        env_prefix="MQPSH_",
        env_file=str(Path(__file__).parent.parent.parent / ".env"),
        extra="ignore",
    )

    @property
    def worker_count(self) -> int:
        """Resolve THREADS into an actual worker count."""
        if self.THREADS > 0:
            return self.THREADS
        return os.cpu_count() or 1

    @staticmethod
    def matrix_literal(text: str) -> list[list[complex]]:
        """
        Parse a row-major matrix literal of (re, im) pairs.

        Rows are separated by ";", entries by whitespace, and each entry is
        "re,im", e.g. "1,0 0,1; 0,-1 2,0".
        """
        rows = []
        for row_str in text.split(";"):
            row_str = row_str.strip()
            if not row_str:
                continue
            row = []
            for pair in row_str.split():
                re_part, im_part = (float(v.strip()) for v in pair.split(","))
                row.append(complex(re_part, im_part))
            rows.append(row)
        return rows


@lru_cache()
def get_settings() -> Settings:
    return Settings()


# Module-level cached settings instance (e.g. `from mqpsh.core.config import settings`).
settings = get_settings()
