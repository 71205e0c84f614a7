"""Imperfection studies: misdetected positions, unequal decay rates, delayed recovery, dead time.

Each study wires a code, its recovery table and a jump handler (or a
recovery-dressed master equation) together. Times are in units of the Rabi
frequency Omega (Grover studies) or of kappa (memory).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from jumpcodes.codes import JumpCode, bare_code, pairing_code
from jumpcodes.errors import DomainError
from jumpcodes.lindblad import DecayModel, integrate_master
from jumpcodes.qstate import DensityMatrix, SparseOperator, StateVector, fidelity, uniform_superposition
from jumpcodes.recovery import RecoveryTable
from jumpcodes.trajectory import (
    DeadTimeRecovery,
    DelayedRecovery,
    EnsembleResult,
    MisdetectionRecovery,
    PerfectRecovery,
    ensemble_average,
    misdetection_distribution,
    trajectory_stream,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GroverModel:
    code: JumpCode
    target_index: int
    omega: float
    v_state: StateVector
    x0: StateVector
    hamiltonian: SparseOperator

    @property
    def overlap(self) -> float:
        """s = <v|x0>."""
        return float(self.v_state.inner(self.x0).real)

    @property
    def tau(self) -> float:
        return math.pi / (2 * self.omega)


@dataclass(frozen=True)
class FidelityEstimate:
    mean_fidelity: float
    std_error: float
    n_traj: int
    fidelities: np.ndarray = field(default_factory=lambda: np.zeros(0), compare=False)


@dataclass(frozen=True)
class AgreementReport:
    """Entrywise comparison of a trajectory density estimate with the master equation."""

    max_deviation: float
    max_sigma_ratio: float
    passed: bool
    ensemble: EnsembleResult = field(compare=False)


def grover_model(code: JumpCode, target_index: int = 0, omega: float = 1.0) -> GroverModel:
    """H = i Omega (|x0><v| - |v><x0|) with |v> the uniform superposition of the codewords."""
    if code.dimension < 2:
        raise DomainError(f"Grover dynamics needs K >= 2 codewords, got {code.dimension}")
    if not 0 <= target_index < code.dimension:
        raise DomainError(f"target index {target_index} outside 0..{code.dimension - 1}")
    v = uniform_superposition(code.codewords)
    x0 = code.codewords[target_index]
    H = (1j * omega) * (SparseOperator.projector(x0, v) - SparseOperator.projector(v, x0))
    H = SparseOperator.from_dense(code.n_qubits, H.dense(), cutoff=1e-15)
    return GroverModel(code, target_index, omega, v, x0, H)


def ideal_grover_fidelity(K: int) -> float:
    """|<x0|psi(pi/2 Omega)>|^2 without decay: a rotation at Omega sqrt(1 - s^2), s = 1/sqrt(K)."""
    s = 1.0 / math.sqrt(K)
    return math.cos(math.acos(s) - (math.pi / 2) * math.sqrt(1 - s * s)) ** 2


# ------------------------------------------------------------------
# Quantum memory with misdetected positions
# ------------------------------------------------------------------

def _memory_state(code: JumpCode, psi0: StateVector | None) -> StateVector:
    return psi0 if psi0 is not None else uniform_superposition(code.codewords)


def _storage_time(kappa: float, t_final: float | None) -> float:
    """Explicit t_final, else pi/(2 kappa); a non-decaying memory has no default."""
    if t_final is not None:
        return t_final
    if kappa <= 0:
        raise DomainError(f"storage time pi/(2 kappa) needs kappa > 0, got kappa={kappa}; give t_final")
    return math.pi / (2 * kappa)


def memory_misdetection(
    code: JumpCode,
    q: float,
    kappa: float = 1.0,
    t_final: float | None = None,
    *,
    n_traj: int,
    master_seed: int,
    psi0: StateVector | None = None,
    threads: int = 1,
) -> EnsembleResult:
    """Memory (H = 0) whose detector reports beta with probability ~ q^|beta - alpha|."""
    if not 0.0 <= q < 1.0:
        raise DomainError(f"misdetection parameter q must lie in [0, 1), got {q}")
    t_final = _storage_time(kappa, t_final)
    psi0 = _memory_state(code, psi0)
    handler = MisdetectionRecovery(RecoveryTable(code).operators(), code.n_qubits, q)
    result = ensemble_average(
        psi0,
        SparseOperator.zero(code.n_qubits),
        DecayModel.uniform(code.n_qubits, kappa),
        t_final,
        handler,
        n_traj=n_traj,
        master_seed=master_seed,
        threads=threads,
    )
    logger.info("memory q=%.3g: F=%.6f +- %.2e (n=%d)", q, result.mean_fidelity, result.std_error, result.n_traj)
    return result


def memory_misdetection_master(
    code: JumpCode,
    q: float,
    kappa: float = 1.0,
    t_final: float | None = None,
    psi0: StateVector | None = None,
    dt: float | None = None,
) -> float:
    """Density-matrix counterpart of ``memory_misdetection`` with the report averaged into the dissipator."""
    t_final = _storage_time(kappa, t_final)
    psi0 = _memory_state(code, psi0)
    recoveries = RecoveryTable(code).operators()
    n = code.n_qubits
    dressing = {}
    for alpha in range(1, n + 1):
        probs = misdetection_distribution(n, alpha, q)
        dressing[alpha] = [(float(p), recoveries[b + 1]) for b, p in enumerate(probs) if p > 0]
    rho = integrate_master(
        DensityMatrix.from_state(psi0),
        SparseOperator.zero(n),
        DecayModel.uniform(n, kappa),
        dressing,
        t_final=t_final,
        dt=dt,
    )
    return fidelity(rho, psi0)


# ------------------------------------------------------------------
# Grover dynamics with unequal decay rates
# ------------------------------------------------------------------

def sample_rates(rng: np.random.Generator, n: int, kappa_mean: float, delta_kappa: float) -> tuple[float, ...]:
    """Gaussian rates with standard deviation ``delta_kappa``; negative draws are redrawn."""
    kappas = rng.normal(kappa_mean, delta_kappa, n)
    while np.any(kappas < 0):
        bad = kappas < 0
        kappas[bad] = rng.normal(kappa_mean, delta_kappa, int(bad.sum()))
    return tuple(float(k) for k in kappas)


def _rates_sample(
    index: int,
    grover: GroverModel,
    dressing: dict[int, SparseOperator] | None,
    kappa_mean: float,
    delta_kappa: float,
    master_seed: int,
    dt: float | None,
) -> float:
    n = grover.code.n_qubits
    model = DecayModel(sample_rates(trajectory_stream(master_seed, index), n, kappa_mean, delta_kappa))
    rho = integrate_master(
        DensityMatrix.from_state(grover.v_state), grover.hamiltonian, model, dressing, t_final=grover.tau, dt=dt
    )
    return fidelity(rho, grover.x0)


def grover_unequal_rates(
    code: JumpCode,
    kappa_mean: float,
    delta_kappa: float,
    *,
    n_samples: int,
    master_seed: int,
    encoded: bool = True,
    omega: float = 1.0,
    target_index: int = 0,
    dt: float | None = None,
    threads: int = 1,
) -> FidelityEstimate:
    """Mean <x0|rho(tau)|x0> over Gaussian rate draws, with jumps dressed by perfect recoveries.

    ``encoded=False`` runs the same Hamiltonian on bare basis states without recovery.
    """
    if n_samples < 1:
        raise DomainError(f"n_samples must be at least 1, got {n_samples}")
    if delta_kappa < 0:
        raise DomainError(f"delta_kappa must be non-negative, got {delta_kappa}")
    if encoded:
        grover = grover_model(code, target_index, omega)
        dressing = RecoveryTable(code).dressing()
    else:
        grover = grover_model(bare_code(code), target_index, omega)
        dressing = None
    fids = Parallel(n_jobs=min(threads, n_samples))(
        delayed(_rates_sample)(i, grover, dressing, kappa_mean, delta_kappa, master_seed, dt)
        for i in range(n_samples)
    )
    fids = np.array(fids)
    std_error = float(np.std(fids, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    estimate = FidelityEstimate(float(fids.mean()), std_error, n_samples, fids)
    logger.info(
        "grover rates %s delta_kappa=%.3g: F=%.6f +- %.2e",
        "encoded" if encoded else "unencoded", delta_kappa, estimate.mean_fidelity, std_error,
    )
    return estimate


# ------------------------------------------------------------------
# Grover dynamics with delayed recovery / detector dead time
# ------------------------------------------------------------------

def _grover_ensemble(grover, kappa, handler, n_traj, master_seed, threads) -> EnsembleResult:
    return ensemble_average(
        grover.v_state,
        grover.hamiltonian,
        DecayModel.uniform(grover.code.n_qubits, kappa),
        grover.tau,
        handler,
        n_traj=n_traj,
        master_seed=master_seed,
        target=grover.x0,
        threads=threads,
    )


def grover_delay(
    code: JumpCode,
    kappa: float = 0.5,
    delay: float = 0.0,
    *,
    n_traj: int,
    master_seed: int,
    omega: float = 1.0,
    target_index: int = 0,
    threads: int = 1,
) -> EnsembleResult:
    """Recovery applied ``delay`` after each detection; evolution continues under H_eff meanwhile."""
    grover = grover_model(code, target_index, omega)
    handler = DelayedRecovery(RecoveryTable(code).operators(), delay)
    result = _grover_ensemble(grover, kappa, handler, n_traj, master_seed, threads)
    logger.info("grover delay=%.3g: F=%.6f +- %.2e", delay, result.mean_fidelity, result.std_error)
    return result


def grover_deadtime(
    code: JumpCode,
    kappa_mean: float,
    dead_time: float,
    *,
    n_traj: int,
    master_seed: int,
    omega: float = 1.0,
    target_index: int = 0,
    threads: int = 1,
) -> EnsembleResult:
    """Jumps within ``dead_time`` of the last detection happen but are neither reported nor recovered."""
    grover = grover_model(code, target_index, omega)
    handler = DeadTimeRecovery(RecoveryTable(code).operators(), dead_time)
    result = _grover_ensemble(grover, kappa_mean, handler, n_traj, master_seed, threads)
    logger.info(
        "grover dead_time=%.3g kappa=%.3g: F=%.6f +- %.2e",
        dead_time, kappa_mean, result.mean_fidelity, result.std_error,
    )
    return result


# ------------------------------------------------------------------
# Cross-method agreement
# ------------------------------------------------------------------

def trajectory_master_agreement(
    code: JumpCode | None = None,
    kappa: float = 1.0,
    *,
    n_traj: int,
    master_seed: int,
    n_sigma: float = 5.0,
    atol: float = 1e-6,
    threads: int = 1,
) -> AgreementReport:
    """Perfectly recovered memory: trajectory density estimate vs the dressed master equation."""
    code = code or pairing_code(4)
    n = code.n_qubits
    psi0 = uniform_superposition(code.codewords)
    H = SparseOperator.zero(n)
    model = DecayModel.uniform(n, kappa)
    table = RecoveryTable(code)
    t_final = _storage_time(kappa, None)
    ens = ensemble_average(
        psi0, H, model, t_final, PerfectRecovery(table.operators()),
        n_traj=n_traj, master_seed=master_seed, keep_density=True, threads=threads,
    )
    rho = integrate_master(DensityMatrix.from_state(psi0), H, model, table.dressing(), t_final=t_final)
    deviation = np.abs(ens.rho_estimate.entries - rho.entries)
    allowed = n_sigma * ens.rho_std_error + atol
    ratio = float((deviation / np.maximum(ens.rho_std_error, 1e-300)).max()) if np.any(ens.rho_std_error) else 0.0
    return AgreementReport(
        max_deviation=float(deviation.max()),
        max_sigma_ratio=ratio,
        passed=bool(np.all(deviation <= allowed)),
        ensemble=ens,
    )
