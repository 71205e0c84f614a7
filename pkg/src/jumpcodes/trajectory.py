"""Monte-Carlo wavefunction unraveling of the decay master equation.

A trajectory evolves the unnormalized state under exp(-i H_eff t) until its
squared norm drops below a uniform draw; a jump channel is then chosen with
probability proportional to ||L_alpha psi||^2, applied and the state
renormalized. After each jump a handler decides what the detector reports
and when (if at all) a recovery unitary is applied.

Every trajectory draws from its own stream keyed by (master_seed, index), and
ensembles are reduced in index order, so results do not depend on how the
work is scheduled.
"""

from __future__ import annotations

import heapq
import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from jumpcodes.config import settings
from jumpcodes.errors import DomainError, NumericError
from jumpcodes.lindblad import DecayModel, effective_hamiltonian, lindblad_ops
from jumpcodes.qstate import (
    DensityMatrix,
    Propagator,
    SparseOperator,
    StateVector,
    expm_apply,
    fidelity,
)

logger = logging.getLogger(__name__)

NORM_FLOOR = 1e-300


# ------------------------------------------------------------------
# Records
# ------------------------------------------------------------------

@dataclass(frozen=True)
class JumpEvent:
    t: float
    alpha: int
    reported: int | None = None
    recovered_at: float | None = None


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    events: tuple[JumpEvent, ...]
    final_state: StateVector
    survived: bool

    @property
    def jump_count(self) -> int:
        return len(self.events)


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    n_traj: int
    mean_fidelity: float
    std_error: float
    mean_jump_count: float
    rho_estimate: DensityMatrix | None = None
    rho_std_error: np.ndarray | None = None
    fidelities: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_failed: int = 0


# ------------------------------------------------------------------
# Jump handlers
# ------------------------------------------------------------------

@dataclass(frozen=True)
class Detection:
    """Detector response to a jump: reported position and recovery delay (None = no recovery)."""

    reported: int | None
    delay: float | None


class JumpHandler(ABC):
    """Decides, per jump, what is reported and which recovery is scheduled."""

    def __init__(self, recoveries: Mapping[int, SparseOperator] | None = None):
        self._recoveries = {a: op.matrix for a, op in (recoveries or {}).items()}

    def recovery_matrix(self, position: int):
        try:
            return self._recoveries[position]
        except KeyError:
            raise DomainError(f"no recovery operator for position {position}") from None

    @abstractmethod
    def respond(
        self, t: float, alpha: int, history: Sequence[JumpEvent], rng: np.random.Generator
    ) -> Detection: ...


class NoRecovery(JumpHandler):
    """Detects every jump at its true position and never corrects."""

    def respond(self, t, alpha, history, rng) -> Detection:
        return Detection(reported=alpha, delay=None)


class PerfectRecovery(JumpHandler):
    def respond(self, t, alpha, history, rng) -> Detection:
        return Detection(reported=alpha, delay=0.0)


class MisdetectionRecovery(JumpHandler):
    """Reports position beta with probability proportional to q^|beta - alpha| and recovers at once."""

    def __init__(self, recoveries: Mapping[int, SparseOperator], n_qubits: int, q: float):
        super().__init__(recoveries)
        if not 0.0 <= q < 1.0:
            raise DomainError(f"misdetection parameter q must lie in [0, 1), got {q}")
        self.n_qubits = n_qubits
        self.q = q
        self._cdf = {
            a: np.cumsum(misdetection_distribution(n_qubits, a, q)) for a in range(1, n_qubits + 1)
        }

    def respond(self, t, alpha, history, rng) -> Detection:
        cdf = self._cdf[alpha]
        beta = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")) + 1
        return Detection(reported=min(beta, self.n_qubits), delay=0.0)


class DelayedRecovery(JumpHandler):
    def __init__(self, recoveries: Mapping[int, SparseOperator], delay: float):
        super().__init__(recoveries)
        if delay < 0:
            raise DomainError(f"delay must be non-negative, got {delay}")
        self.delay = delay

    def respond(self, t, alpha, history, rng) -> Detection:
        return Detection(reported=alpha, delay=self.delay)


class DeadTimeRecovery(JumpHandler):
    """One shared detector window: blind for ``dead_time`` after every reported jump."""

    def __init__(self, recoveries: Mapping[int, SparseOperator], dead_time: float):
        super().__init__(recoveries)
        if dead_time < 0:
            raise DomainError(f"dead time must be non-negative, got {dead_time}")
        self.dead_time = dead_time

    def respond(self, t, alpha, history, rng) -> Detection:
        last = next((e.t for e in reversed(history) if e.reported is not None), None)
        if last is not None and t < last + self.dead_time:
            return Detection(reported=None, delay=None)
        return Detection(reported=alpha, delay=0.0)


def misdetection_distribution(n_qubits: int, alpha: int, q: float) -> np.ndarray:
    """P(reported = beta | jump at alpha) over beta = 1..N, renormalized on the finite array."""
    if not 0.0 <= q < 1.0:
        raise DomainError(f"misdetection parameter q must lie in [0, 1), got {q}")
    distance = np.abs(np.arange(1, n_qubits + 1) - alpha)
    weights = np.power(q, distance, dtype=float)
    return weights / weights.sum()


# ------------------------------------------------------------------
# Sampling
# ------------------------------------------------------------------

def trajectory_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator keyed by (master_seed, trajectory index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=(index,)))


@dataclass(order=True)
class _Pending:
    time: float
    event_index: int
    position: int = field(compare=False)


def sample_trajectory(
    psi0: StateVector,
    H: SparseOperator,
    model: DecayModel,
    t_final: float,
    handler: JumpHandler | None = None,
    rng: np.random.Generator | None = None,
    propagator: Propagator | None = None,
) -> TrajectoryRecord:
    if abs(psi0.norm() - 1.0) > 1e-9:
        raise DomainError(f"initial state is not normalized (norm {psi0.norm():.12g})")
    if t_final < 0:
        raise DomainError(f"t_final must be non-negative, got {t_final}")
    handler = handler or NoRecovery()
    rng = rng or np.random.default_rng()
    prop = propagator or Propagator(effective_hamiltonian(H, model))
    jumps = [L.matrix for L in lindblad_ops(model)]
    kappa_max = model.kappa_max
    tol = settings.waiting_time_tolerance / kappa_max if kappa_max > 0 else 0.0

    state = np.array(psi0.amplitudes)
    t = 0.0
    threshold = 1.0 - rng.random()
    events: list[JumpEvent] = []
    pending: list[_Pending] = []

    while t < t_final:
        stop = min(t_final, pending[0].time) if pending else t_final
        phi = prop.apply_array(state, stop - t)
        norm2 = float(np.vdot(phi, phi).real)

        if kappa_max == 0 or norm2 >= threshold:
            state, t = phi, stop
            while pending and pending[0].time <= t:
                due = heapq.heappop(pending)
                state = handler.recovery_matrix(due.position) @ state
                events[due.event_index] = replace(events[due.event_index], recovered_at=t)
            continue

        # squared norm is non-increasing between jumps, so bisect for the crossing
        lo, hi = 0.0, stop - t
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            trial = prop.apply_array(state, mid)
            if float(np.vdot(trial, trial).real) >= threshold:
                lo = mid
            else:
                hi = mid
        t_jump = t + hi
        phi = prop.apply_array(state, hi)

        images = [L @ phi for L in jumps]
        weights = np.array([float(np.vdot(v, v).real) for v in images])
        total = weights.sum()
        if not total > NORM_FLOOR:
            raise NumericError(f"jump norm underflow ({total:.3e}) at t={t_jump:.6g}")
        cdf = np.cumsum(weights)
        channel = int(np.searchsorted(cdf, rng.random() * total, side="right"))
        channel = min(channel, len(jumps) - 1)
        alpha = channel + 1
        state = images[channel] / math.sqrt(weights[channel])
        t = t_jump
        threshold = 1.0 - rng.random()

        detection = handler.respond(t, alpha, events, rng)
        event = JumpEvent(t=t, alpha=alpha, reported=detection.reported)
        if detection.reported is not None and detection.delay is not None:
            if detection.delay == 0.0:
                state = handler.recovery_matrix(detection.reported) @ state
                event = replace(event, recovered_at=t)
            else:
                heapq.heappush(
                    pending, _Pending(t + detection.delay, len(events), detection.reported)
                )
        events.append(event)

    norm = float(np.linalg.norm(state))
    if norm < NORM_FLOOR:
        raise NumericError("state norm underflow at end of trajectory")
    final = StateVector(psi0.n_qubits, state / norm)
    survived = all(e.recovered_at is not None for e in events)
    return TrajectoryRecord(events=tuple(events), final_state=final, survived=survived)


def _run_chunk(
    indices: range,
    psi0: StateVector,
    H: SparseOperator,
    model: DecayModel,
    t_final: float,
    handler: JumpHandler,
    master_seed: int,
    target: StateVector,
    keep_density: bool,
) -> tuple[list[float], list[int], np.ndarray | None, np.ndarray | None, int]:
    prop = Propagator(effective_hamiltonian(H, model))
    fids, counts = [], []
    dim = 1 << psi0.n_qubits
    rho_sum = np.zeros((dim, dim), dtype=np.complex128) if keep_density else None
    rho_sq = np.zeros((dim, dim)) if keep_density else None
    failed = 0
    for index in indices:
        try:
            record = sample_trajectory(
                psi0, H, model, t_final, handler, trajectory_stream(master_seed, index), prop
            )
        except NumericError as exc:
            logger.debug("Trajectory %d failed: %s", index, exc)
            failed += 1
            continue
        amps = record.final_state.amplitudes
        fids.append(fidelity(record.final_state, target))
        counts.append(record.jump_count)
        if keep_density:
            outer = np.outer(amps, amps.conj())
            rho_sum += outer
            rho_sq += np.abs(outer) ** 2
    return fids, counts, rho_sum, rho_sq, failed


def ensemble_average(
    psi0: StateVector,
    H: SparseOperator,
    model: DecayModel,
    t_final: float,
    handler: JumpHandler | None = None,
    *,
    n_traj: int,
    master_seed: int,
    target: StateVector | None = None,
    keep_density: bool = False,
    threads: int = 1,
) -> EnsembleResult:
    """Average ``n_traj`` trajectories; fidelity is taken against ``target`` (default ``psi0``)."""
    if n_traj < 1:
        raise DomainError(f"n_traj must be at least 1, got {n_traj}")
    handler = handler or NoRecovery()
    target = target or psi0
    size = settings.chunk_size
    chunks = [range(i, min(i + size, n_traj)) for i in range(0, n_traj, size)]
    parts = Parallel(n_jobs=min(threads, len(chunks)))(
        delayed(_run_chunk)(c, psi0, H, model, t_final, handler, master_seed, target, keep_density)
        for c in chunks
    )

    fids = np.array([f for p in parts for f in p[0]])
    counts = np.array([c for p in parts for c in p[1]], dtype=float)
    failed = sum(p[4] for p in parts)
    if failed:
        logger.warning("%d of %d trajectories failed and were excluded", failed, n_traj)
    n_ok = fids.size
    if n_ok == 0:
        raise NumericError(f"all {n_traj} trajectories failed")
    std_error = float(np.std(fids, ddof=1) / math.sqrt(n_ok)) if n_ok > 1 else 0.0

    rho_estimate = rho_std_error = None
    if keep_density:
        rho_sum = np.zeros_like(parts[0][2])
        rho_sq = np.zeros_like(parts[0][3])
        for p in parts:
            rho_sum += p[2]
            rho_sq += p[3]
        mean = rho_sum / n_ok
        var = np.maximum(rho_sq / n_ok - np.abs(mean) ** 2, 0.0)
        rho_estimate = DensityMatrix(psi0.n_qubits, mean)
        rho_std_error = np.sqrt(var / max(n_ok - 1, 1))

    logger.debug("Ensemble of %d trajectories in %d chunks: F=%.6f", n_ok, len(chunks), fids.mean())
    return EnsembleResult(
        n_traj=n_ok,
        mean_fidelity=float(fids.mean()),
        std_error=std_error,
        mean_jump_count=float(counts.mean()),
        rho_estimate=rho_estimate,
        rho_std_error=rho_std_error,
        fidelities=fids,
        n_failed=failed,
    )


def record_probability(
    psi0: StateVector,
    H: SparseOperator,
    model: DecayModel,
    record: TrajectoryRecord | Sequence[tuple[float, int]],
    t: float,
) -> float:
    """Probability density of the jump record over [0, t] (plain photon counting, no recoveries)."""
    if isinstance(record, TrajectoryRecord):
        jumps = [(e.t, e.alpha) for e in record.events]
    else:
        jumps = [(float(tj), int(a)) for tj, a in record]
    times = [tj for tj, _ in jumps]
    if any(b < a for a, b in zip(times, times[1:])) or any(tj < 0 or tj > t for tj in times):
        raise DomainError(f"record times must be sorted within [0, {t}]: {times}")
    heff = effective_hamiltonian(H, model)
    ops = lindblad_ops(model)
    psi, last = psi0, 0.0
    for tj, alpha in jumps:
        if not 1 <= alpha <= model.n_qubits:
            raise DomainError(f"jump position {alpha} outside 1..{model.n_qubits}")
        psi = expm_apply(heff, psi, tj - last)
        psi = StateVector(psi.n_qubits, ops[alpha - 1].matrix @ psi.amplitudes)
        last = tj
    psi = expm_apply(heff, psi, t - last)
    return psi.norm() ** 2
