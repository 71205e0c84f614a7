"""Decay operators, effective Hamiltonian and the master-equation integrator."""

from __future__ import annotations

import math

import numpy as np
import pytest

from jumpcodes.errors import DomainError, NumericError
from jumpcodes.lindblad import (
    DecayModel,
    JumpSet,
    decay_operator,
    effective_hamiltonian,
    integrate_master,
    jump_product,
    lindblad_op,
)
from jumpcodes.qstate import BasisState, DensityMatrix, SparseOperator, StateVector, apply, fidelity
from jumpcodes.qstate import uniform_superposition


def ket(label: str) -> StateVector:
    return StateVector.basis(BasisState.from_string(label))


# ---- DecayModel / JumpSet ----

def test_equal_rates_flag():
    assert DecayModel.uniform(3, 0.5).equal_rates
    assert not DecayModel((0.5, 0.5, 0.6)).equal_rates


@pytest.mark.parametrize("kappas", [(-0.1, 1.0), (math.nan,), ()])
def test_decay_model_rejects_bad_rates(kappas):
    with pytest.raises(DomainError):
        DecayModel(kappas)


def test_jump_set_sorted_and_distinct():
    assert JumpSet((3, 1)).positions == (1, 3)
    with pytest.raises(DomainError, match="distinct"):
        JumpSet((2, 2))


# ---- lindblad_op ----

def test_single_qubit_lowering():
    L = lindblad_op(DecayModel((4.0,)), 1)
    assert np.allclose(apply(L, ket("1")).amplitudes, 2 * ket("0").amplitudes)
    assert apply(L, ket("0")).norm() == 0.0


def test_lowering_second_of_four():
    L = lindblad_op(DecayModel.uniform(4, 1.0), 2)
    assert np.allclose(apply(L, ket("1100")).amplitudes, ket("1000").amplitudes)


def test_number_operator_form():
    model = DecayModel((0.5, 2.0, 1.0))
    L = lindblad_op(model, 2)
    diag = np.diag((L.adjoint() @ L).dense()).real
    expected = [2.0 if BasisState(b, 3).bits & 0b010 else 0.0 for b in range(8)]
    assert np.allclose(diag, expected)
    assert np.allclose((L.adjoint() @ L).dense(), np.diag(diag))


def test_position_out_of_range():
    with pytest.raises(DomainError, match="outside"):
        lindblad_op(DecayModel.uniform(2, 1.0), 3)


def test_decay_operator_counts_excitations():
    diag = np.diag(decay_operator(DecayModel.uniform(3, 1.0)).dense()).real
    assert np.allclose(diag, [bin(b).count("1") for b in range(8)])


# ---- effective_hamiltonian ----

def test_effective_hamiltonian_on_weight_class():
    heff = effective_hamiltonian(SparseOperator.zero(4), DecayModel.uniform(4, 0.8)).dense()
    for word in ("0011", "0111", "1111"):
        b = int(word, 2)
        assert heff[b, b] == pytest.approx(-0.5j * word.count("1") * 0.8)


def test_effective_hamiltonian_closed_system_is_zero():
    assert effective_hamiltonian(SparseOperator.zero(2), DecayModel.uniform(2, 0.0)).nnz == 0


def test_unequal_rates_split_degeneracy():
    heff = effective_hamiltonian(SparseOperator.zero(2), DecayModel((0.3, 0.9))).dense()
    assert heff[0b10, 0b10] == pytest.approx(-0.5j * 0.3)
    assert heff[0b01, 0b01] == pytest.approx(-0.5j * 0.9)


def test_non_hermitian_hamiltonian_rejected():
    H = SparseOperator.from_entries(1, {(0, 1): 1.0})
    with pytest.raises(DomainError, match="not Hermitian"):
        effective_hamiltonian(H, DecayModel((1.0,)))


# ---- jump_product ----

def test_empty_jump_set_is_identity():
    assert np.allclose(jump_product(DecayModel.uniform(2, 1.0), ()).dense(), np.eye(4))


def test_two_jumps():
    J = jump_product(DecayModel.uniform(4, 1.0), (1, 2))
    assert np.allclose(apply(J, ket("1100")).amplitudes, ket("0000").amplitudes)
    assert apply(J, ket("1010")).norm() == 0.0


def test_jump_product_order_independent():
    model = DecayModel((0.2, 0.7, 1.3, 0.4))
    a = jump_product(model, (1, 3, 4)).dense()
    b = lindblad_op(model, 4) @ lindblad_op(model, 1) @ lindblad_op(model, 3)
    assert np.allclose(a, b.dense())


# ---- integrate_master ----

def test_closed_system_stays_pure():
    H = SparseOperator.from_entries(1, {(0, 1): 1.0, (1, 0): 1.0})
    rho = integrate_master(
        DensityMatrix.from_state(ket("0")), H, DecayModel((0.0,)), t_final=2.0
    )
    assert rho.purity() == pytest.approx(1.0, abs=1e-8)
    assert rho.entries[1, 1].real == pytest.approx(math.sin(2.0) ** 2, abs=1e-8)


@pytest.mark.parametrize("kappa, t", [(1.0, 1.0), (0.3, 2.5)])
def test_single_qubit_decay(kappa, t):
    rho = integrate_master(
        DensityMatrix.from_state(ket("1")), SparseOperator.zero(1), DecayModel((kappa,)), t_final=t
    )
    assert rho.entries[1, 1].real == pytest.approx(math.exp(-kappa * t), abs=1e-9)
    assert rho.trace().real == pytest.approx(1.0, abs=1e-9)


def test_recovery_dressing_freezes_code_state(code4, recoveries4):
    psi = uniform_superposition(code4.codewords)
    rho = integrate_master(
        DensityMatrix.from_state(psi),
        SparseOperator.zero(4),
        DecayModel.uniform(4, 1.0),
        recoveries4,
        t_final=math.pi / 2,
    )
    assert fidelity(rho, psi) == pytest.approx(1.0, abs=1e-6)


def test_mixture_dressing_must_be_a_distribution(recoveries4):
    dressing = {1: [(0.5, recoveries4[1]), (0.2, recoveries4[2])]}
    rho0 = DensityMatrix.from_state(ket("0011"))
    with pytest.raises(DomainError, match="not a distribution"):
        integrate_master(rho0, SparseOperator.zero(4), DecayModel.uniform(4, 1.0), dressing, t_final=0.1)


def test_oversized_step_reports_drift():
    with pytest.raises(NumericError, match="trace drift"):
        integrate_master(
            DensityMatrix.from_state(ket("1")),
            SparseOperator.zero(1),
            DecayModel((1.0,)),
            t_final=1e4,
            dt=100.0,
        )


def test_zero_time_returns_initial_state():
    rho0 = DensityMatrix.from_state(ket("10"))
    rho = integrate_master(rho0, SparseOperator.zero(2), DecayModel.uniform(2, 1.0), t_final=0.0)
    assert np.allclose(rho.entries, rho0.entries)


def test_driven_decay_stays_hermitian_without_symmetrizing(recoveries4):
    # unequal rates, a drive and a mixed dressing exercise every term of the generator
    H = SparseOperator.from_entries(4, {(0b0011, 0b0101): 0.7, (0b0101, 0b0011): 0.7, (0b1100, 0b1100): 0.3})
    model = DecayModel((0.4, 0.9, 1.3, 0.6))
    dressing = {1: [(0.7, recoveries4[1]), (0.3, recoveries4[2])], 3: recoveries4[3]}
    rho0 = DensityMatrix.from_state((ket("0011") + ket("0101")).normalized())
    rho = integrate_master(rho0, H, model, dressing, t_final=3.0)
    assert rho.hermiticity_defect() < 1e-8
    assert rho.trace().real == pytest.approx(1.0, abs=1e-9)


def test_non_hermitian_input_reports_defect():
    entries = np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex)
    entries[0, 3] = 1e-6j
    with pytest.raises(NumericError, match="Hermiticity defect"):
        integrate_master(
            DensityMatrix(2, entries), SparseOperator.zero(2), DecayModel.uniform(2, 1.0), t_final=0.01
        )
