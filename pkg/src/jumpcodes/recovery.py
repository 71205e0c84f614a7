"""Unitary recovery operations undoing a detected jump on the code space.

For a code that corrects one jump at alpha the images d_i = L_alpha|c_i>/sqrt(lambda)
are orthonormal, and any unitary with U d_i = c_i satisfies
U L_alpha|_C = sqrt(lambda) 1|_C. The unitary is completed deterministically
by Gram-Schmidt over computational basis vectors in ascending order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from jumpcodes.codes import JumpCode
from jumpcodes.errors import ConditionViolation, DomainError
from jumpcodes.lindblad import DecayModel, lindblad_op
from jumpcodes.qstate import SparseOperator

logger = logging.getLogger(__name__)

ORTHONORMAL_TOL = 1e-10
_COMPLETION_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class RecoveryOp:
    alpha: int
    unitary: SparseOperator
    code_ref: str


@dataclass(frozen=True)
class RecoveryCheck:
    residual: float
    unitarity_defect: float


def complete_basis(vectors: np.ndarray) -> np.ndarray:
    """Extend orthonormal columns to a unitary, adding basis vectors e_0, e_1, ... in order."""
    dim = vectors.shape[0]
    basis = [vectors[:, k] for k in range(vectors.shape[1])]
    for index in range(dim):
        if len(basis) == dim:
            break
        v = np.zeros(dim, dtype=np.complex128)
        v[index] = 1.0
        # two passes keep the completion orthogonal to working precision
        for _ in range(2):
            for q in basis:
                v = v - np.vdot(q, v) * q
        norm = np.linalg.norm(v)
        if norm > _COMPLETION_TOL:
            basis.append(v / norm)
    return np.stack(basis, axis=1)


def _jumped_norms(images: np.ndarray) -> np.ndarray:
    """<c_i|L^dag L|c_i> for every codeword column."""
    return np.einsum("ij,ij->j", images.conj(), images).real


def synthesize_recovery(code: JumpCode, alpha: int, model: DecayModel) -> RecoveryOp:
    if model.n_qubits != code.n_qubits:
        raise DomainError(f"decay model has {model.n_qubits} qubits, code {code.n_qubits}")
    L = lindblad_op(model, alpha)
    C = code.basis_matrix()
    images = L.matrix @ C
    norms = _jumped_norms(images)
    if not norms.any():
        raise ConditionViolation(f"lambda({{{alpha}}}) = 0: jumps at {alpha} never occur on this code")
    if norms.max() - norms.min() > ORTHONORMAL_TOL * norms.max():
        listed = ", ".join(f"{v:.6g}" for v in norms)
        raise ConditionViolation(
            f"{code.label} does not correct a jump at position {alpha}: "
            f"codewords decay with unequal rates <c_i|L^dag L|c_i> = [{listed}]"
        )
    lam = float(norms.mean())
    D = images / math.sqrt(lam)
    defect = float(np.abs(D.conj().T @ D - np.eye(code.dimension)).max())
    if defect > ORTHONORMAL_TOL:
        raise ConditionViolation(
            f"{code.label} does not correct a jump at position {alpha}: jumped images deviate "
            f"from orthonormal by {defect:.3e}"
        )
    source = complete_basis(D)
    target = complete_basis(C)
    U = target @ source.conj().T
    logger.debug("Synthesized recovery for %s at position %d", code.label, alpha)
    return RecoveryOp(alpha, SparseOperator.from_dense(code.n_qubits, U, cutoff=1e-14), code.label)


def verify_recovery(rec: RecoveryOp, code: JumpCode, model: DecayModel) -> RecoveryCheck:
    """max_i ||(U L_alpha / sqrt(lambda) - 1)|c_i>|| and max |U^dag U - 1|."""
    if rec.unitary.n_qubits != code.n_qubits:
        raise DomainError(f"recovery acts on {rec.unitary.n_qubits} qubits, code has {code.n_qubits}")
    C = code.basis_matrix()
    images = lindblad_op(model, rec.alpha).matrix @ C
    lam = float(_jumped_norms(images).mean())
    restored = rec.unitary.matrix @ (images / math.sqrt(lam)) if lam > 0 else np.zeros_like(C)
    residual = float(np.linalg.norm(restored - C, axis=0).max())
    U = rec.unitary.dense()
    unitarity = float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())
    return RecoveryCheck(residual=residual, unitarity_defect=unitarity)


class RecoveryTable:
    """Recovery unitaries of one code, synthesized on first use and then reused."""

    def __init__(self, code: JumpCode, model: DecayModel | None = None):
        self.code = code
        # U_alpha does not depend on the rate value, only on which qubit decayed
        self.model = model or DecayModel.uniform(code.n_qubits, 1.0)
        self._cache: dict[int, RecoveryOp] = {}

    def get(self, alpha: int) -> RecoveryOp:
        if alpha not in self._cache:
            self._cache[alpha] = synthesize_recovery(self.code, alpha, self.model)
        return self._cache[alpha]

    def operators(self) -> dict[int, SparseOperator]:
        return {a: self.get(a).unitary for a in range(1, self.code.n_qubits + 1)}

    def dressing(self) -> dict[int, SparseOperator]:
        """Per-position U_alpha for a recovery-dressed master equation."""
        return self.operators()
