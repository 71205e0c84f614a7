"""Centralised settings resolved from environment variables.

The run registry is optional: set JUMPCODE_DATABASE_URL (or DATABASE_URL)
to record every CLI run. Docker Compose provides a PostgreSQL URL.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field


def _default_database_url() -> str | None:
    return os.environ.get("JUMPCODE_DATABASE_URL") or os.environ.get("DATABASE_URL") or None


def _default_threads() -> int:
    explicit = os.environ.get("JUMPCODE_THREADS")
    if explicit:
        return max(1, int(explicit))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Settings:
    default_seed: int = field(
        default_factory=lambda: int(os.environ.get("JUMPCODE_SEED", "20050101"))
    )
    artifacts_dir: str = field(default_factory=lambda: os.environ.get("ARTIFACTS_DIR", "./artifacts"))
    database_url: str | None = field(default_factory=_default_database_url)
    threads: int = field(default_factory=_default_threads)

    # numerics
    integrator_dt_scale: float = 1e-3
    trace_drift_limit: float = 1e-4
    hermiticity_limit: float = 1e-8
    waiting_time_tolerance: float = 1e-9
    chunk_size: int = 256


settings = Settings()
