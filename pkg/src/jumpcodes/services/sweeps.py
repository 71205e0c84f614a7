"""Parameter sweeps over the imperfection studies and their on-disk artifacts.

Every point of a sweep reuses the same master seed, so neighbouring points
are compared on common random numbers. Output is a CSV (or JSON) table
preceded by a provenance header, plus a JSON sidecar holding the complete
ImperfectionConfig.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from jumpcodes import __version__
from jumpcodes.codes import JumpCode
from jumpcodes.config import settings
from jumpcodes.errors import DomainError
from jumpcodes.schemas import ImperfectionConfig
from jumpcodes.services.experiments import (
    grover_deadtime,
    grover_delay,
    grover_unequal_rates,
    memory_misdetection,
)

logger = logging.getLogger(__name__)

SWEEP_PARAMETERS = {
    "memory": "q",
    "grover-rates": "delta_kappa",
    "grover-delay": "delay",
    "grover-deadtime": "dead_time",
}
SWEEP_COLUMNS = ["parameter", "mean_fidelity", "std_error", "n_traj", "seed"]
FLOAT_FORMAT = "%.12g"


@dataclass(frozen=True)
class Provenance:
    command: str
    parameter: str | None
    config_hash: str
    seed: int | None
    code_label: str | None = None

    def header_lines(self) -> list[str]:
        lines = [f"# jumpcodes {__version__}", f"# command={self.command}"]
        if self.code_label:
            lines.append(f"# code={self.code_label}")
        if self.parameter:
            lines.append(f"# parameter={self.parameter}")
        lines.append(f"# config_hash={self.config_hash}")
        if self.seed is not None:
            lines.append(f"# seed={self.seed}")
        return lines

    def as_dict(self) -> dict:
        return {
            "tool": "jumpcodes",
            "version": __version__,
            "command": self.command,
            "code": self.code_label,
            "parameter": self.parameter,
            "config_hash": self.config_hash,
            "seed": self.seed,
        }


def config_hash(config: Mapping) -> str:
    """sha256 over the canonical JSON form of the run configuration."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()


# ------------------------------------------------------------------
# Running
# ------------------------------------------------------------------

def run_point(
    command: str,
    code: JumpCode,
    value: float,
    imperfection: ImperfectionConfig,
    *,
    n_traj: int,
    seed: int,
    t_final: float | None = None,
    omega: float = 1.0,
    encoded: bool = True,
    threads: int = 1,
):
    """One sweep point; the swept parameter overrides its field in ``imperfection``."""
    if command not in SWEEP_PARAMETERS:
        raise DomainError(f"{command!r} is not a sweep command")
    point = imperfection.model_copy(update={SWEEP_PARAMETERS[command]: value})
    point = ImperfectionConfig.model_validate(point.model_dump())
    if command == "memory":
        return memory_misdetection(
            code, point.q, point.kappa_mean, t_final, n_traj=n_traj, master_seed=seed, threads=threads
        )
    if command == "grover-rates":
        return grover_unequal_rates(
            code, point.kappa_mean, point.delta_kappa, n_samples=n_traj, master_seed=seed,
            encoded=encoded, omega=omega, threads=threads,
        )
    if command == "grover-delay":
        return grover_delay(
            code, point.kappa_mean, point.delay, n_traj=n_traj, master_seed=seed, omega=omega, threads=threads
        )
    return grover_deadtime(
        code, point.kappa_mean, point.dead_time, n_traj=n_traj, master_seed=seed, omega=omega, threads=threads
    )


def run_sweep(
    command: str,
    code: JumpCode,
    values: Sequence[float],
    imperfection: ImperfectionConfig,
    *,
    n_traj: int,
    seed: int,
    t_final: float | None = None,
    omega: float = 1.0,
    encoded: bool = True,
    threads: int = 1,
    timing: bool = False,
) -> pd.DataFrame:
    """Run every value of the grid in order; ``timing`` adds a wall_time column."""
    if not values:
        raise DomainError("sweep grid is empty")
    rows = []
    for value in values:
        start = time.perf_counter()
        result = run_point(
            command, code, value, imperfection,
            n_traj=n_traj, seed=seed, t_final=t_final, omega=omega, encoded=encoded, threads=threads,
        )
        row = {
            "parameter": float(value),
            "mean_fidelity": result.mean_fidelity,
            "std_error": result.std_error,
            "n_traj": result.n_traj,
            "seed": seed,
        }
        if timing:
            row["wall_time"] = time.perf_counter() - start
        rows.append(row)
        logger.info(
            "%s %s=%g: F=%.6f +- %.2e",
            command, SWEEP_PARAMETERS[command], value, result.mean_fidelity, result.std_error,
        )
    columns = SWEEP_COLUMNS + (["wall_time"] if timing else [])
    return pd.DataFrame(rows, columns=columns)


# ------------------------------------------------------------------
# Artifacts
# ------------------------------------------------------------------

def resolve_output(out: str | None) -> Path | None:
    """Bare file names land in the artifacts directory; paths are kept as given."""
    if out is None:
        return None
    path = Path(out)
    if path.parent == Path("."):
        path = Path(settings.artifacts_dir) / path
    return path


def _round(value):
    if isinstance(value, float):
        return float(FLOAT_FORMAT % value)
    return None if pd.isna(value) else value


def render_table(df: pd.DataFrame, provenance: Provenance, fmt: str = "csv", extra: Mapping | None = None) -> str:
    """Serialize a result table; identical inputs give identical text."""
    if fmt == "csv":
        body = df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return "\n".join(provenance.header_lines()) + "\n" + body
    if fmt == "json":
        rows = [{k: _round(v) for k, v in row.items()} for row in df.to_dict(orient="records")]
        payload = {"provenance": provenance.as_dict(), "rows": rows}
        if extra:
            payload.update(extra)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    raise DomainError(f"unknown output format {fmt!r}; expected csv or json")


def write_text(text: str, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info("Wrote %s", path)
    return path


def write_sidecar(path: Path, provenance: Provenance, imperfection: ImperfectionConfig, grid: Sequence[float]) -> Path:
    """JSON sidecar next to a CSV: provenance, full imperfection config and the sweep grid."""
    payload = {
        "provenance": provenance.as_dict(),
        "imperfection": imperfection.model_dump(),
        "grid": [float(v) for v in grid],
    }
    return write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", path.with_suffix(".json"))
