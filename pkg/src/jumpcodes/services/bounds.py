"""Upper-bound table for jump codes, with the dimensions reached by the built-in constructions."""

from __future__ import annotations

import logging
import math

import pandas as pd

from jumpcodes.codes import upper_bound
from jumpcodes.errors import DomainError
from jumpcodes.qstate import MAX_QUBITS

logger = logging.getLogger(__name__)

BOUNDS_COLUMNS = ["N", "d", "w", "upper_bound", "achieved", "construction"]


def achieved_dimension(N: int, w: int, d: int) -> tuple[int, str] | None:
    """Largest K an implemented construction reaches at (N, w, d), if any."""
    if d == 0:
        return math.comb(N, w), "weight-class"
    if d == 1 and N % 2 == 0 and w == N // 2 and N >= 2:
        return math.comb(N - 1, N // 2 - 1), "pairing"
    if (N, w) == (8, 4) and d <= 3:
        return 3, "builtin-833"
    return None


def emit_bounds_table(N_max: int, d_max: int) -> pd.DataFrame:
    """One row per (N <= N_max, d <= d_max, d <= w <= N), ordered by N, d, w."""
    if not 1 <= N_max <= MAX_QUBITS:
        raise DomainError(f"N_max must lie in 1..{MAX_QUBITS}, got {N_max}")
    if d_max < 0:
        raise DomainError(f"d_max must be non-negative, got {d_max}")
    rows = []
    for N in range(1, N_max + 1):
        for d in range(0, min(d_max, N) + 1):
            for w in range(d, N + 1):
                achieved = achieved_dimension(N, w, d)
                rows.append({
                    "N": N,
                    "d": d,
                    "w": w,
                    "upper_bound": upper_bound(N, w, d),
                    "achieved": achieved[0] if achieved else None,
                    "construction": achieved[1] if achieved else None,
                })
    df = pd.DataFrame(rows, columns=BOUNDS_COLUMNS)
    df["achieved"] = df["achieved"].astype("Int64")
    logger.info("Bounds table: %d rows for N <= %d, d <= %d", len(df), N_max, d_max)
    return df
