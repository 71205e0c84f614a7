"""Spontaneous-decay Lindblad operators, the effective Hamiltonian and a master-equation integrator.

Each qubit alpha decays through its own reservoir with rate kappa_alpha:

    L_alpha = sqrt(kappa_alpha) |0><1|_alpha
    H_eff   = H - (i/2) sum_alpha L_alpha^dag L_alpha
    d rho / dt = -i (H_eff rho - rho H_eff^dag) + sum_alpha A_alpha rho A_alpha^dag

with A_alpha = L_alpha, or U_alpha L_alpha when a recovery dressing is supplied.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from jumpcodes.config import settings
from jumpcodes.errors import DomainError, NumericError
from jumpcodes.qstate import MAX_QUBITS, DensityMatrix, SparseOperator, position_bit

logger = logging.getLogger(__name__)

Dressing = SparseOperator | Sequence[tuple[float, SparseOperator]]


@dataclass(frozen=True)
class DecayModel:
    kappas: tuple[float, ...]

    def __post_init__(self) -> None:
        kappas = tuple(float(k) for k in self.kappas)
        if not 1 <= len(kappas) <= MAX_QUBITS:
            raise DomainError(f"need 1..{MAX_QUBITS} decay rates, got {len(kappas)}")
        if any(not math.isfinite(k) or k < 0 for k in kappas):
            raise DomainError(f"decay rates must be finite and non-negative: {kappas}")
        object.__setattr__(self, "kappas", kappas)

    @classmethod
    def uniform(cls, n_qubits: int, kappa: float) -> DecayModel:
        return cls((kappa,) * n_qubits)

    @property
    def n_qubits(self) -> int:
        return len(self.kappas)

    @property
    def kappa_max(self) -> float:
        return max(self.kappas)

    @property
    def equal_rates(self) -> bool:
        return max(self.kappas) - min(self.kappas) < 1e-12

    def kappa(self, alpha: int) -> float:
        position_bit(alpha, self.n_qubits)
        return self.kappas[alpha - 1]


@dataclass(frozen=True)
class JumpSet:
    """Set E of distinct jump positions, stored strictly increasing."""

    positions: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        positions = tuple(int(a) for a in self.positions)
        if len(set(positions)) != len(positions):
            raise DomainError(f"jump positions must be distinct: {positions}")
        object.__setattr__(self, "positions", tuple(sorted(positions)))

    def __len__(self) -> int:
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)


def lindblad_op(model: DecayModel, alpha: int) -> SparseOperator:
    """sqrt(kappa_alpha) |0><1| on qubit alpha, identity elsewhere."""
    n = model.n_qubits
    bit = position_bit(alpha, n)
    cols = np.flatnonzero(np.arange(1 << n) & bit)
    rows = cols ^ bit
    vals = np.full(cols.size, math.sqrt(model.kappas[alpha - 1]), dtype=np.complex128)
    dim = 1 << n
    return SparseOperator(n, sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim)))


def lindblad_ops(model: DecayModel) -> list[SparseOperator]:
    return [lindblad_op(model, a) for a in range(1, model.n_qubits + 1)]


def decay_operator(model: DecayModel) -> SparseOperator:
    """sum_alpha L_alpha^dag L_alpha, diagonal with entry sum of excited kappas."""
    total = SparseOperator.zero(model.n_qubits)
    for op in lindblad_ops(model):
        total = total + op.adjoint() @ op
    return total


def effective_hamiltonian(H: SparseOperator, model: DecayModel) -> SparseOperator:
    if H.n_qubits != model.n_qubits:
        raise DomainError(f"Hamiltonian has {H.n_qubits} qubits, decay model {model.n_qubits}")
    if not H.is_hermitian(1e-10):
        raise DomainError("Hamiltonian is not Hermitian")
    return H + (-0.5j) * decay_operator(model)


def jump_product(model: DecayModel, E: JumpSet | Iterable[int]) -> SparseOperator:
    """J_E = L_a1 L_a2 ... L_an; the factors commute since they act on distinct qubits."""
    E = E if isinstance(E, JumpSet) else JumpSet(tuple(E))
    product = SparseOperator.identity(model.n_qubits)
    for alpha in E:
        product = lindblad_op(model, alpha) @ product
    return product


# ------------------------------------------------------------------
# Master equation
# ------------------------------------------------------------------

def _collapse_stack(
    model: DecayModel,
    jump_dressing: Mapping[int, Dressing] | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Dense dissipator operators A_k and their weights."""
    ops, weights = [], []
    for alpha, L in enumerate(lindblad_ops(model), start=1):
        if L.nnz == 0:
            continue
        dressing = (jump_dressing or {}).get(alpha)
        if dressing is None:
            ops.append(L.dense())
            weights.append(1.0)
        elif isinstance(dressing, SparseOperator):
            ops.append((dressing @ L).dense())
            weights.append(1.0)
        else:
            total = sum(p for p, _ in dressing)
            if abs(total - 1.0) > 1e-12 or any(p < 0 for p, _ in dressing):
                raise DomainError(f"dressing mixture for position {alpha} is not a distribution")
            for p, U in dressing:
                if p > 0:
                    ops.append((U @ L).dense())
                    weights.append(p)
    dim = 1 << model.n_qubits
    if not ops:
        return np.zeros((0, dim, dim), dtype=np.complex128), np.zeros(0)
    return np.array(ops), np.array(weights)


def integrate_master(
    rho0: DensityMatrix,
    H: SparseOperator,
    model: DecayModel,
    jump_dressing: Mapping[int, Dressing] | None = None,
    *,
    t_final: float,
    dt: float | None = None,
) -> DensityMatrix:
    """Fixed-step RK4 integration of the (optionally recovery-dressed) master equation."""
    if rho0.n_qubits != model.n_qubits:
        raise DomainError(f"state has {rho0.n_qubits} qubits, decay model {model.n_qubits}")
    if t_final < 0:
        raise DomainError(f"t_final must be non-negative, got {t_final}")
    heff = effective_hamiltonian(H, model).dense()
    heff_dag = heff.conj().T
    collapse, weights = _collapse_stack(model, jump_dressing)
    collapse_dag = collapse.conj().transpose(0, 2, 1)
    w = weights.reshape(-1, 1, 1)

    if dt is None:
        scale = max(float(np.linalg.norm(H.dense(), 2)), model.kappa_max)
        dt = settings.integrator_dt_scale / scale if scale > 0 else max(t_final, 1.0)
    if dt <= 0:
        raise DomainError(f"time step must be positive, got {dt}")
    steps = max(1, math.ceil(t_final / dt - 1e-9))
    h = t_final / steps

    def rhs(rho: np.ndarray) -> np.ndarray:
        drho = -1j * (heff @ rho - rho @ heff_dag)
        if weights.size:
            drho += np.sum(w * (collapse @ rho @ collapse_dag), axis=0)
        return drho

    rho = np.array(rho0.entries)
    trace0 = np.real(np.trace(rho))
    limit = settings.trace_drift_limit
    for step in range(steps if t_final > 0 else 0):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = abs(np.real(np.trace(rho)) - trace0)
        if not math.isfinite(drift) or drift > limit:
            raise NumericError(
                f"trace drift {drift:.3e} at step {step + 1}/{steps} (t={h * (step + 1):.6g}, dt={h:.3e}); "
                "reduce dt"
            )
    # RK4 preserves Hermiticity only up to rounding
    defect = float(np.abs(rho - rho.conj().T).max())
    if not defect <= settings.hermiticity_limit:
        raise NumericError(f"Hermiticity defect {defect:.3e} after {steps} RK4 steps of {h:.3e}")
    logger.debug("Integrated master equation: %d RK4 steps of %.3e", steps, h)
    return DensityMatrix(rho0.n_qubits, rho)
