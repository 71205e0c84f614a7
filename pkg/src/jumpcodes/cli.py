"""CLI with subcommands.

Subcommands:
  construct         Build a code and print it as JSON
  verify            Check the d-jump correction condition (exit 2 on failure)
  bounds            Upper-bound table with achieved dimensions
  memory            Sweep the misdetection parameter q of a quantum memory
  grover-rates      Sweep the decay-rate spread of the Grover model
  grover-delay      Sweep the detection-to-recovery delay
  grover-deadtime   Sweep the detector dead time
  trajectory-check  Trajectory ensemble vs master equation (exit 2 on disagreement)
  migrate-db        Run Alembic migrations for the run registry

Every run flag can also come from a TOML file given with --config; flags
given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import tomllib
from dataclasses import dataclass
from typing import Literal

from alembic.util import CommandError
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from sqlalchemy.exc import SQLAlchemyError

from jumpcodes.codes import code_from_spec, code_to_json
from jumpcodes.config import settings
from jumpcodes.db import migrate_db
from jumpcodes.errors import ConditionViolation, DomainError, NumericError
from jumpcodes.repositories import runs as runs_repo
from jumpcodes.schemas import ImperfectionConfig
from jumpcodes.services.bounds import emit_bounds_table
from jumpcodes.services.experiments import trajectory_master_agreement
from jumpcodes.services.reports import verification_out
from jumpcodes.services.sweeps import (
    SWEEP_PARAMETERS,
    Provenance,
    config_hash,
    render_table,
    resolve_output,
    run_sweep,
    write_sidecar,
    write_text,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILED = 2
EXIT_NUMERIC = 3

COMMANDS = (
    "construct", "verify", "bounds",
    "memory", "grover-rates", "grover-delay", "grover-deadtime",
    "trajectory-check",
)

_DEFAULT_CODE = {
    "construct": "builtin-833",
    "verify": "builtin-833",
    "memory": "pairing(4)",
    "grover-rates": "pairing(6)",
    "grover-delay": "pairing(6)",
    "grover-deadtime": "pairing(6)",
    "trajectory-check": "pairing(4)",
}
_DEFAULT_KAPPA = {
    "memory": 1.0,
    "grover-rates": 1.0,
    "grover-delay": 0.5,
    "grover-deadtime": 0.5,
    "trajectory-check": 1.0,
}
# grover-rates samples rate vectors, each a full master-equation run
_DEFAULT_N_TRAJ = {"grover-rates": 50}
DEFAULT_N_TRAJ = 2000

_DEFAULT_GRID = {
    "memory": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
    "grover-rates": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
    "grover-delay": [0.0, 0.5, 1.0, 2.0, 4.0],
    "grover-deadtime": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
}


class RunConfig(BaseModel):
    """Resolved configuration of one CLI run."""

    model_config = ConfigDict(extra="forbid")

    command: Literal[COMMANDS]
    code: str | None = None
    d: int | None = Field(None, ge=0)
    q: list[float] | None = None
    delta_kappa: list[float] | None = None
    kappa: float | None = Field(None, ge=0.0)
    delay: list[float] | None = None
    dead_time: list[float] | None = None
    n_traj: int | None = Field(None, ge=1)
    seed: int | None = None
    t_final: float | None = Field(None, gt=0.0)
    phi: float | None = None
    omega: float = Field(1.0, gt=0.0)
    out: str | None = None
    format: Literal["csv", "json"] = "csv"
    threads: int = Field(default_factory=lambda: settings.threads, ge=1)
    N: int | None = Field(None, ge=1, le=24)
    timing: bool = False
    unencoded: bool = False

    @field_validator("q", "delta_kappa", "delay", "dead_time", mode="before")
    @classmethod
    def _grid(cls, value):
        """Accept ``0.1,0.2`` strings and bare numbers as one-point grids."""
        if isinstance(value, str):
            return [float(v) for v in value.split(",") if v.strip()]
        if isinstance(value, (int, float)):
            return [float(value)]
        return value

    def resolved(self) -> RunConfig:
        """Fill command-dependent defaults so equal runs hash equally."""
        update = {"seed": self.seed if self.seed is not None else settings.default_seed}
        if self.code is None and self.command in _DEFAULT_CODE:
            update["code"] = _DEFAULT_CODE[self.command]
        if self.kappa is None and self.command in _DEFAULT_KAPPA:
            update["kappa"] = _DEFAULT_KAPPA[self.command]
        if self.n_traj is None:
            update["n_traj"] = _DEFAULT_N_TRAJ.get(self.command, DEFAULT_N_TRAJ)
        return self.model_copy(update=update)

    def hash(self) -> str:
        return config_hash(self.model_dump(exclude={"out", "threads"}))


@dataclass(frozen=True)
class Outcome:
    exit_code: int
    code_label: str | None = None
    n_points: int = 0
    output_path: str | None = None
    mean_fidelity: float | None = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    # Shared flags available to every subcommand
    common = _Parser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true")

    # Absent flags stay absent so config-file values can fill them
    params = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    params.add_argument("--config", help="TOML file with run flags (names with _ for -)")
    params.add_argument("--code", help='"pairing(N[,phi])", "builtin-833" or a SEED/code JSON file')
    params.add_argument("--d", type=int, help="number of detected jumps to correct")
    params.add_argument("--q", help="misdetection parameter(s), comma separated")
    params.add_argument("--delta-kappa", help="decay-rate spread(s), comma separated")
    params.add_argument("--kappa", type=float, help="decay rate (mean rate for grover-rates/-deadtime)")
    params.add_argument("--delay", help="recovery delay(s), comma separated")
    params.add_argument("--dead-time", help="detector dead time(s), comma separated")
    params.add_argument(
        "--n-traj", type=int,
        help="trajectories per point (default 2000); rate samples for grover-rates (default 50)",
    )
    params.add_argument("--seed", type=int, help="master seed (default: JUMPCODE_SEED)")
    params.add_argument("--t-final", type=float, help="memory storage time (default pi/(2 kappa))")
    params.add_argument("--phi", type=float, help="relative phase of pairing codewords")
    params.add_argument("--omega", type=float, help="Rabi frequency of the Grover model")
    params.add_argument("--out", help="output file (bare names go to ARTIFACTS_DIR)")
    params.add_argument("--format", choices=("csv", "json"))
    params.add_argument("--threads", type=int, help="worker count (default: all cores)")
    params.add_argument("--N", type=int, help="largest N in the bounds table")
    params.add_argument("--timing", action="store_true", help="add a wall_time column")
    params.add_argument("--unencoded", action="store_true", help="grover-rates on bare basis states")

    p = _Parser(description="jumpcodes CLI", parents=[common])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common, params])
    sub.add_parser("migrate-db", parents=[common])
    return p


def load_config(args: argparse.Namespace) -> RunConfig:
    """Merge config-file values under explicit flags and validate."""
    given = {k: v for k, v in vars(args).items() if k not in ("verbose", "config")}
    values: dict = {}
    if getattr(args, "config", None):
        with open(args.config, "rb") as fh:
            values.update(tomllib.load(fh))
    values.update(given)
    return RunConfig.model_validate(values).resolved()


# ---- commands ----

def _emit(text: str, out: str | None):
    path = resolve_output(out)
    if path is None:
        sys.stdout.write(text)
        return None
    return write_text(text, path)


def _load_code(config: RunConfig):
    code = code_from_spec(config.code, phi=config.phi)
    logger.info("Code %s %s", code.label, code.parameters())
    return code


def _with_provenance(payload: dict, provenance: Provenance) -> str:
    # extra top-level key; code files stay loadable with --code
    return json.dumps({"provenance": provenance.as_dict(), **payload}, indent=2) + "\n"


def _construct(config: RunConfig) -> Outcome:
    code = _load_code(config)
    provenance = Provenance("construct", None, config.hash(), config.seed, code.label)
    path = _emit(_with_provenance(json.loads(code_to_json(code)), provenance), config.out)
    return Outcome(EXIT_OK, code.label, code.dimension, str(path) if path else None)


def _verify(config: RunConfig) -> Outcome:
    code = _load_code(config)
    d = config.d if config.d is not None else code.order
    report = verification_out(code, d)
    provenance = Provenance("verify", None, config.hash(), config.seed, code.label)
    path = _emit(_with_provenance(report.model_dump(), provenance), config.out)
    exit_code = EXIT_OK if report.passed else EXIT_FAILED
    return Outcome(exit_code, code.label, len(report.lambda_table), str(path) if path else None)


def _bounds(config: RunConfig) -> Outcome:
    n_max = config.N if config.N is not None else 8
    d_max = config.d if config.d is not None else 3
    df = emit_bounds_table(n_max, d_max)
    provenance = Provenance("bounds", None, config.hash(), config.seed)
    path = _emit(render_table(df, provenance, config.format), config.out)
    return Outcome(EXIT_OK, None, len(df), str(path) if path else None)


def _sweep(config: RunConfig) -> Outcome:
    code = _load_code(config)
    parameter = SWEEP_PARAMETERS[config.command]
    grid = getattr(config, parameter) or _DEFAULT_GRID[config.command]

    fixed = {"kappa_mean": config.kappa}
    for name in ("q", "delta_kappa", "delay", "dead_time"):
        if name == parameter:
            continue
        value = getattr(config, name)
        if value and len(value) > 1:
            raise DomainError(f"only {parameter} is swept by {config.command}; got several {name} values")
        if value:
            fixed[name] = value[0]
    imperfection = ImperfectionConfig(**fixed, **{parameter: grid[0]})

    df = run_sweep(
        config.command, code, grid, imperfection,
        n_traj=config.n_traj, seed=config.seed, t_final=config.t_final, omega=config.omega,
        encoded=not config.unencoded, threads=config.threads, timing=config.timing,
    )
    provenance = Provenance(config.command, parameter, config.hash(), config.seed, code.label)
    extra = {"imperfection": imperfection.model_dump(), "grid": [float(v) for v in grid]}
    path = _emit(render_table(df, provenance, config.format, extra), config.out)
    if path is not None and config.format == "csv":
        write_sidecar(path, provenance, imperfection, grid)
    return Outcome(
        EXIT_OK, code.label, len(df), str(path) if path else None, float(df["mean_fidelity"].iloc[0])
    )


def _trajectory_check(config: RunConfig) -> Outcome:
    code = _load_code(config)
    report = trajectory_master_agreement(
        code, config.kappa, n_traj=config.n_traj, master_seed=config.seed, threads=config.threads
    )
    payload = {
        "code": code.label,
        "n_traj": report.ensemble.n_traj,
        "max_deviation": float("%.12g" % report.max_deviation),
        "max_sigma_ratio": float("%.12g" % report.max_sigma_ratio),
        "passed": report.passed,
    }
    provenance = Provenance("trajectory-check", None, config.hash(), config.seed, code.label)
    path = _emit(_with_provenance(payload, provenance), config.out)
    logger.info("Trajectory/master agreement: %s", "passed" if report.passed else "FAILED")
    exit_code = EXIT_OK if report.passed else EXIT_FAILED
    return Outcome(exit_code, code.label, 1, str(path) if path else None, report.ensemble.mean_fidelity)


_RUNNERS = {
    "construct": _construct,
    "verify": _verify,
    "bounds": _bounds,
    "memory": _sweep,
    "grover-rates": _sweep,
    "grover-delay": _sweep,
    "grover-deadtime": _sweep,
    "trajectory-check": _trajectory_check,
}


def _register(config: RunConfig, outcome: Outcome) -> None:
    """Record the run when a registry is configured; failures only log."""
    if not settings.database_url:
        return
    try:
        migrate_db()
        runs_repo.register(
            command=config.command,
            config_hash=config.hash(),
            seed=config.seed,
            code_label=outcome.code_label,
            n_points=outcome.n_points,
            output_path=outcome.output_path,
            mean_fidelity=outcome.mean_fidelity,
        )
        logger.info("Registered %s run %s", config.command, config.hash()[:12])
    except (SQLAlchemyError, CommandError) as exc:
        logger.warning("Run registry unavailable: %s", exc)


def run(config: RunConfig) -> int:
    """Execute one command and return its exit status."""
    try:
        outcome = _RUNNERS[config.command](config)
    except ConditionViolation as exc:
        logger.error("Correction condition violated: %s", exc)
        return EXIT_FAILED
    except (DomainError, ValidationError) as exc:
        logger.error("Invalid configuration: %s", exc)
        return EXIT_INVALID
    except NumericError as exc:
        logger.error("Numerical failure: %s", exc)
        return EXIT_NUMERIC
    _register(config, outcome)
    return outcome.exit_code


def main(argv: list[str] | None = None) -> None:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s: %(message)s",
    )

    if args.command == "migrate-db":
        migrate_db()
        return

    try:
        config = load_config(args)
    except (ValidationError, OSError, tomllib.TOMLDecodeError) as exc:
        logger.error("Invalid configuration: %s", exc)
        sys.exit(EXIT_INVALID)
    sys.exit(run(config))


if __name__ == "__main__":
    main()
