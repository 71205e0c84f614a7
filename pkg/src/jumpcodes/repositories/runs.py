"""Repository for the experiment_runs table."""

from __future__ import annotations

from sqlalchemy import text
from sqlalchemy.engine import Engine

from jumpcodes.db import get_session

_COLUMNS = "command, config_hash, seed, code_label, n_points, output_path, mean_fidelity, created_at"


def register(
    command: str,
    config_hash: str,
    seed: int | None,
    code_label: str | None,
    n_points: int,
    output_path: str | None,
    mean_fidelity: float | None,
    engine: Engine | None = None,
) -> None:
    """Insert one CLI run into the registry."""
    with get_session(engine) as session:
        session.execute(
            text("""
                INSERT INTO experiment_runs
                    (command, config_hash, seed, code_label, n_points, output_path, mean_fidelity)
                VALUES
                    (:command, :config_hash, :seed, :code_label, :n_points, :output_path, :mean_fidelity)
            """),
            {
                "command": command,
                "config_hash": config_hash,
                "seed": seed,
                "code_label": code_label,
                "n_points": n_points,
                "output_path": output_path,
                "mean_fidelity": mean_fidelity,
            },
        )


def get_latest(limit: int = 20, engine: Engine | None = None) -> list[dict]:
    """Most recent runs first."""
    with get_session(engine) as session:
        rows = session.execute(
            text(f"SELECT {_COLUMNS} FROM experiment_runs ORDER BY id DESC LIMIT :limit"),
            {"limit": limit},
        ).mappings().all()
    return [dict(r) for r in rows]


def get_by_hash(config_hash: str, engine: Engine | None = None) -> list[dict]:
    """All runs recorded for one configuration, oldest first."""
    with get_session(engine) as session:
        rows = session.execute(
            text(f"SELECT {_COLUMNS} FROM experiment_runs WHERE config_hash = :h ORDER BY id"),
            {"h": config_hash},
        ).mappings().all()
    return [dict(r) for r in rows]
