"""Hilbert-space primitives: basis words, state vectors, density matrices and operators.

Qubit positions are numbered 1..N left to right, so position 1 is the most
significant bit of a basis word and ``|1100>`` has qubits 1 and 2 excited.
States and density matrices are dense numpy arrays; operators are scipy CSR
matrices. All containers are immutable after construction.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from jumpcodes.errors import DomainError, NumericError

MAX_QUBITS = 24


def _check_n_qubits(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise DomainError(f"n_qubits must lie in 1..{MAX_QUBITS}, got {n_qubits}")


def position_bit(alpha: int, n_qubits: int) -> int:
    """Bit mask of qubit position ``alpha`` (1-based, position 1 = MSB)."""
    if not 1 <= alpha <= n_qubits:
        raise DomainError(f"position {alpha} outside 1..{n_qubits}")
    return 1 << (n_qubits - alpha)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


# ------------------------------------------------------------------
# Basis words
# ------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class BasisState:
    bits: int
    n_qubits: int

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        if not 0 <= self.bits < (1 << self.n_qubits):
            raise DomainError(f"bits {self.bits:#x} exceed {self.n_qubits} qubits")

    @classmethod
    def from_string(cls, ket: str) -> BasisState:
        """Parse a ket label such as ``"0110"``."""
        ket = ket.strip().strip("|>⟩")
        if not ket or set(ket) - {"0", "1"}:
            raise DomainError(f"not a basis word: {ket!r}")
        return cls(int(ket, 2), len(ket))

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def to_string(self) -> str:
        return format(self.bits, f"0{self.n_qubits}b")

    def positions(self) -> tuple[int, ...]:
        """Excited positions, ascending."""
        return tuple(a for a in range(1, self.n_qubits + 1) if self.bits & position_bit(a, self.n_qubits))

    def complement(self) -> BasisState:
        return BasisState(self.bits ^ ((1 << self.n_qubits) - 1), self.n_qubits)

    def __str__(self) -> str:
        return f"|{self.to_string()}>"


def weight_subspace(n_qubits: int, w: int) -> list[BasisState]:
    """All basis words of N qubits with exactly ``w`` excitations, ascending."""
    _check_n_qubits(n_qubits)
    if not 0 <= w <= n_qubits:
        raise DomainError(f"weight {w} outside 0..{n_qubits}")
    words = []
    for excited in combinations(range(1, n_qubits + 1), w):
        bits = 0
        for alpha in excited:
            bits |= position_bit(alpha, n_qubits)
        words.append(BasisState(bits, n_qubits))
    words.sort()
    return words


# ------------------------------------------------------------------
# States
# ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != 1 << self.n_qubits:
            raise DomainError(f"expected {1 << self.n_qubits} amplitudes, got {amps.size}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def basis(cls, state: BasisState) -> StateVector:
        amps = np.zeros(1 << state.n_qubits, dtype=np.complex128)
        amps[state.bits] = 1.0
        return cls(state.n_qubits, amps)

    @classmethod
    def from_kets(cls, n_qubits: int, kets: Mapping[int | str, complex]) -> StateVector:
        """Build a state from ``{bits or ket string: amplitude}`` (not normalized)."""
        amps = np.zeros(1 << n_qubits, dtype=np.complex128)
        for key, amp in kets.items():
            word = BasisState.from_string(key) if isinstance(key, str) else BasisState(key, n_qubits)
            if word.n_qubits != n_qubits:
                raise DomainError(f"ket {word} does not have {n_qubits} qubits")
            amps[word.bits] += amp
        return cls(n_qubits, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> StateVector:
        n = self.norm()
        if n == 0.0 or not math.isfinite(n):
            raise NumericError(f"cannot normalize a state of norm {n}")
        return StateVector(self.n_qubits, self.amplitudes / n)

    def inner(self, other: StateVector) -> complex:
        """<self|other>."""
        _check_same(self.n_qubits, other.n_qubits)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def support(self, tol: float = 1e-12) -> list[BasisState]:
        idx = np.flatnonzero(np.abs(self.amplitudes) > tol)
        return [BasisState(int(i), self.n_qubits) for i in idx]

    def __add__(self, other: StateVector) -> StateVector:
        _check_same(self.n_qubits, other.n_qubits)
        return StateVector(self.n_qubits, self.amplitudes + other.amplitudes)

    def __rmul__(self, scalar: complex) -> StateVector:
        return StateVector(self.n_qubits, scalar * self.amplitudes)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n_qubits: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        dim = 1 << self.n_qubits
        rho = np.array(self.entries, dtype=np.complex128)
        if rho.shape != (dim, dim):
            raise DomainError(f"expected a {dim}x{dim} matrix, got {rho.shape}")
        object.__setattr__(self, "entries", _frozen(rho))

    @classmethod
    def from_state(cls, psi: StateVector) -> DensityMatrix:
        return cls(psi.n_qubits, np.outer(psi.amplitudes, psi.amplitudes.conj()))

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.entries - self.entries.conj().T).max())


def _check_same(n_a: int, n_b: int) -> None:
    if n_a != n_b:
        raise DomainError(f"dimension mismatch: {n_a} vs {n_b} qubits")


# ------------------------------------------------------------------
# Operators
# ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SparseOperator:
    n_qubits: int
    matrix: sp.csr_matrix

    def __post_init__(self) -> None:
        _check_n_qubits(self.n_qubits)
        dim = 1 << self.n_qubits
        mat = sp.csr_matrix(self.matrix, dtype=np.complex128)
        if mat.shape != (dim, dim):
            raise DomainError(f"expected a {dim}x{dim} operator, got {mat.shape}")
        mat.eliminate_zeros()
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, n_qubits: int) -> SparseOperator:
        return cls(n_qubits, sp.identity(1 << n_qubits, dtype=np.complex128, format="csr"))

    @classmethod
    def zero(cls, n_qubits: int) -> SparseOperator:
        dim = 1 << n_qubits
        return cls(n_qubits, sp.csr_matrix((dim, dim), dtype=np.complex128))

    @classmethod
    def from_entries(cls, n_qubits: int, entries: Mapping[tuple[int, int], complex]) -> SparseOperator:
        """Build from ``{(row bits, col bits): value}``."""
        dim = 1 << n_qubits
        rows, cols, vals = [], [], []
        for (r, c), v in entries.items():
            rows.append(r)
            cols.append(c)
            vals.append(v)
        return cls(n_qubits, sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=np.complex128))

    @classmethod
    def from_dense(cls, n_qubits: int, dense: np.ndarray, cutoff: float = 0.0) -> SparseOperator:
        dense = np.asarray(dense, dtype=np.complex128)
        if cutoff > 0.0:
            dense = np.where(np.abs(dense) > cutoff, dense, 0.0)
        return cls(n_qubits, sp.csr_matrix(dense))

    @classmethod
    def projector(cls, psi: StateVector, phi: StateVector | None = None) -> SparseOperator:
        """|psi><phi| (``phi`` defaults to ``psi``)."""
        phi = psi if phi is None else phi
        _check_same(psi.n_qubits, phi.n_qubits)
        return cls.from_dense(psi.n_qubits, np.outer(psi.amplitudes, phi.amplitudes.conj()))

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def adjoint(self) -> SparseOperator:
        return SparseOperator(self.n_qubits, self.matrix.conj().T.tocsr())

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        diff = self.matrix - self.matrix.conj().T
        return diff.nnz == 0 or float(np.abs(diff.data).max()) <= tol

    def __matmul__(self, other: SparseOperator) -> SparseOperator:
        _check_same(self.n_qubits, other.n_qubits)
        return SparseOperator(self.n_qubits, (self.matrix @ other.matrix).tocsr())

    def __add__(self, other: SparseOperator) -> SparseOperator:
        _check_same(self.n_qubits, other.n_qubits)
        return SparseOperator(self.n_qubits, (self.matrix + other.matrix).tocsr())

    def __sub__(self, other: SparseOperator) -> SparseOperator:
        return self + (-1.0) * other

    def __rmul__(self, scalar: complex) -> SparseOperator:
        return SparseOperator(self.n_qubits, (scalar * self.matrix).tocsr())


def apply(op: SparseOperator, psi: StateVector) -> StateVector:
    """Exact linear action ``op |psi>``; the result is not renormalized."""
    _check_same(op.n_qubits, psi.n_qubits)
    return StateVector(psi.n_qubits, op.matrix @ psi.amplitudes)


def _check_finite(op: SparseOperator) -> None:
    if op.matrix.nnz and not np.all(np.isfinite(op.matrix.data)):
        raise NumericError("operator has non-finite entries")


def expm_apply(op: SparseOperator, psi: StateVector, t: float) -> StateVector:
    """``exp(-i op t) |psi>`` for a possibly non-Hermitian generator (hbar = 1)."""
    _check_same(op.n_qubits, psi.n_qubits)
    if t < 0:
        raise DomainError(f"propagation time must be non-negative, got {t}")
    _check_finite(op)
    if t == 0 or op.nnz == 0:
        return psi
    out = expm_multiply(-1j * t * op.matrix, psi.amplitudes)
    if not np.all(np.isfinite(out)):
        raise NumericError("matrix exponential produced non-finite amplitudes")
    return StateVector(psi.n_qubits, out)


class Propagator:
    """Reusable ``exp(-i op t)`` for a fixed generator.

    Normal generators (upper-triangular Schur factor diagonal to
    ``normal_tol``) are exponentiated exactly through their eigenvalues;
    anything else falls back to ``scipy.linalg.expm`` per call.
    """

    def __init__(self, op: SparseOperator, normal_tol: float = 1e-10):
        _check_finite(op)
        self.n_qubits = op.n_qubits
        dense = op.dense()
        schur_t, schur_z = scipy.linalg.schur(dense, output="complex")
        scale = max(1.0, float(np.abs(dense).max(initial=0.0)))
        off = float(np.abs(np.triu(schur_t, 1)).max(initial=0.0))
        self.is_normal = off <= normal_tol * scale
        self._dense = dense
        if self.is_normal:
            self._eigenvalues = np.diag(schur_t).copy()
            self._z = schur_z
            self._zh = schur_z.conj().T

    def apply_array(self, amplitudes: np.ndarray, t: float) -> np.ndarray:
        if t == 0:
            return amplitudes.copy()
        if self.is_normal:
            return self._z @ (np.exp(-1j * t * self._eigenvalues) * (self._zh @ amplitudes))
        return scipy.linalg.expm(-1j * t * self._dense) @ amplitudes

    def __call__(self, psi: StateVector, t: float) -> StateVector:
        _check_same(self.n_qubits, psi.n_qubits)
        if t < 0:
            raise DomainError(f"propagation time must be non-negative, got {t}")
        return StateVector(psi.n_qubits, self.apply_array(psi.amplitudes, t))


def fidelity(a: StateVector | DensityMatrix, b: StateVector) -> float:
    """|<b|a>|^2 for a state, <b|rho|b> for a density matrix."""
    _check_same(a.n_qubits, b.n_qubits)
    if isinstance(a, DensityMatrix):
        value = np.real(np.vdot(b.amplitudes, a.entries @ b.amplitudes))
    else:
        value = abs(np.vdot(b.amplitudes, a.amplitudes)) ** 2
    return float(min(1.0, max(0.0, value)))


def uniform_superposition(states: Iterable[StateVector]) -> StateVector:
    """Normalized equal-weight sum of the given orthonormal states."""
    states = list(states)
    if not states:
        raise DomainError("no states to superpose")
    total = states[0].amplitudes.copy()
    for s in states[1:]:
        _check_same(states[0].n_qubits, s.n_qubits)
        total = total + s.amplitudes
    return StateVector(states[0].n_qubits, total).normalized()
