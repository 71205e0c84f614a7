"""Basis words, state vectors, operators and propagation."""

from __future__ import annotations

import math

import numpy as np
import pytest

from jumpcodes.errors import DomainError, NumericError
from jumpcodes.lindblad import DecayModel, effective_hamiltonian, lindblad_op
from jumpcodes.qstate import (
    BasisState,
    DensityMatrix,
    Propagator,
    SparseOperator,
    StateVector,
    apply,
    expm_apply,
    fidelity,
    uniform_superposition,
    weight_subspace,
)


def ket(label: str) -> StateVector:
    return StateVector.basis(BasisState.from_string(label))


# ---- BasisState ----

def test_basis_state_round_trip():
    s = BasisState.from_string("0110")
    assert s.bits == 6
    assert s.to_string() == "0110"
    assert s.weight == 2


def test_positions_count_from_the_left():
    assert BasisState.from_string("0110").positions() == (2, 3)
    assert BasisState.from_string("1000").positions() == (1,)


def test_complement():
    assert BasisState.from_string("0011").complement().to_string() == "1100"


@pytest.mark.parametrize("label", ["", "012", "abc"])
def test_from_string_rejects_non_binary(label):
    with pytest.raises(DomainError, match="not a basis word"):
        BasisState.from_string(label)


def test_bits_beyond_width_rejected():
    with pytest.raises(DomainError, match="exceed"):
        BasisState(16, 4)


# ---- weight_subspace ----

def test_weight_subspace_four_two():
    words = [s.to_string() for s in weight_subspace(4, 2)]
    assert words == ["0011", "0101", "0110", "1001", "1010", "1100"]


@pytest.mark.parametrize("n, w, expected", [(5, 0, 1), (6, 3, 20), (8, 4, 70), (4, 4, 1)])
def test_weight_subspace_sizes(n, w, expected):
    assert len(weight_subspace(n, w)) == expected


def test_weight_subspace_zero_weight_is_ground_state():
    assert weight_subspace(3, 0)[0].to_string() == "000"


@pytest.mark.parametrize("n, w", [(4, 5), (0, 0)])
def test_weight_subspace_domain(n, w):
    with pytest.raises(DomainError):
        weight_subspace(n, w)


# ---- StateVector / DensityMatrix ----

def test_from_kets_accepts_strings_and_bits():
    a = StateVector.from_kets(2, {"01": 1.0, "10": 1.0})
    b = StateVector.from_kets(2, {1: 1.0, 2: 1.0})
    assert np.allclose(a.amplitudes, b.amplitudes)
    assert a.norm() == pytest.approx(math.sqrt(2))


def test_amplitudes_are_read_only():
    psi = ket("01")
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 1.0


def test_normalizing_zero_state_fails():
    with pytest.raises(NumericError):
        StateVector(2, np.zeros(4)).normalized()


def test_density_matrix_of_pure_state():
    rho = DensityMatrix.from_state(uniform_superposition([ket("01"), ket("10")]))
    assert rho.trace() == pytest.approx(1.0)
    assert rho.purity() == pytest.approx(1.0)
    assert rho.hermiticity_defect() == 0.0


# ---- apply ----

def test_identity_leaves_state_unchanged():
    psi = uniform_superposition([ket("0110"), ket("1001")])
    assert np.allclose(apply(SparseOperator.identity(4), psi).amplitudes, psi.amplitudes)


def test_lowering_operator_on_second_position():
    L2 = lindblad_op(DecayModel.uniform(4, 1.0), 2)
    assert np.allclose(apply(L2, ket("0110")).amplitudes, ket("0010").amplitudes)


def test_lowering_operator_annihilates_ground_position():
    L2 = lindblad_op(DecayModel.uniform(4, 1.0), 2)
    assert apply(L2, ket("0010")).norm() == 0.0


def test_apply_dimension_mismatch():
    with pytest.raises(DomainError, match="dimension mismatch"):
        apply(SparseOperator.identity(3), ket("01"))


def test_operator_algebra():
    X = SparseOperator.from_entries(1, {(0, 1): 1.0, (1, 0): 1.0})
    assert np.allclose((X @ X).dense(), np.eye(2))
    assert (X - X).nnz == 0
    assert X.is_hermitian()
    assert not SparseOperator.from_entries(1, {(0, 1): 1.0}).is_hermitian()


# ---- expm_apply / Propagator ----

def test_zero_generator_is_identity():
    psi = ket("0101")
    assert np.allclose(expm_apply(SparseOperator.zero(4), psi, 3.0).amplitudes, psi.amplitudes)


def test_no_jump_decay_on_weight_class():
    kappa, t = 0.7, 1.3
    heff = effective_hamiltonian(SparseOperator.zero(4), DecayModel.uniform(4, kappa))
    psi = uniform_superposition([ket("0011"), ket("1100")])
    out = expm_apply(heff, psi, t)
    assert np.allclose(out.amplitudes, math.exp(-2 * kappa * t / 2) * psi.amplitudes, atol=1e-12)


def test_two_level_rotation():
    omega, t = 0.8, 0.9
    X = omega * SparseOperator.from_entries(1, {(0, 1): 1.0, (1, 0): 1.0})
    out = expm_apply(X, ket("0"), t)
    expected = np.array([math.cos(omega * t), -1j * math.sin(omega * t)])
    assert np.allclose(out.amplitudes, expected, atol=1e-10)


def test_negative_time_rejected():
    with pytest.raises(DomainError, match="non-negative"):
        expm_apply(SparseOperator.identity(1), ket("0"), -1.0)


def test_non_finite_generator_rejected():
    bad = SparseOperator.from_entries(1, {(0, 0): np.inf})
    with pytest.raises(NumericError, match="non-finite"):
        expm_apply(bad, ket("0"), 1.0)


def test_propagator_matches_expm_for_non_normal_generator():
    model = DecayModel((0.3, 1.1))
    H = SparseOperator.from_entries(2, {(1, 3): 0.5, (3, 1): 0.5, (0, 2): 0.2j, (2, 0): -0.2j})
    heff = effective_hamiltonian(H, model)
    psi = uniform_superposition([ket("01"), ket("11")])
    prop = Propagator(heff)
    assert np.allclose(prop(psi, 1.7).amplitudes, expm_apply(heff, psi, 1.7).amplitudes, atol=1e-10)


def test_propagator_diagonal_path_for_equal_rates():
    heff = effective_hamiltonian(SparseOperator.zero(3), DecayModel.uniform(3, 1.0))
    assert Propagator(heff).is_normal


# ---- fidelity ----

def test_fidelity_self_and_orthogonal():
    psi = ket("01")
    assert fidelity(psi, psi) == pytest.approx(1.0)
    assert fidelity(psi, ket("10")) == 0.0


def test_fidelity_uniform_superposition_overlap(code6):
    v = uniform_superposition(code6.codewords)
    assert fidelity(v, code6.codewords[0]) == pytest.approx(1 / code6.dimension, abs=1e-12)


def test_fidelity_of_density_matrix():
    psi = uniform_superposition([ket("01"), ket("10")])
    assert fidelity(DensityMatrix.from_state(psi), psi) == pytest.approx(1.0)


# ---- properties ----

def test_weight_subspace_sizes_up_to_twelve():
    for n in range(1, 13):
        for w in range(n + 1):
            assert len(weight_subspace(n, w)) == math.comb(n, w)


def test_hermitian_evolution_preserves_norm():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    H = SparseOperator.from_dense(3, A + A.conj().T)
    psi = StateVector(3, rng.normal(size=8) + 1j * rng.normal(size=8)).normalized()
    assert expm_apply(H, psi, 2.5).norm() == pytest.approx(1.0, abs=1e-9)


def test_apply_is_linear():
    rng = np.random.default_rng(5)
    L = lindblad_op(DecayModel((0.4, 1.2, 0.9)), 2)
    a, b = 0.3 - 1.1j, 2.0 + 0.5j
    psi1 = StateVector(3, rng.normal(size=8) + 1j * rng.normal(size=8))
    psi2 = StateVector(3, rng.normal(size=8) + 1j * rng.normal(size=8))
    lhs = apply(L, a * psi1 + b * psi2).amplitudes
    rhs = a * apply(L, psi1).amplitudes + b * apply(L, psi2).amplitudes
    assert np.allclose(lhs, rhs, atol=1e-12)
