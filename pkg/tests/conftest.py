"""Shared test fixtures: small codes, decay models and reference codeword supports."""

from __future__ import annotations

import pytest

from jumpcodes.codes import builtin_833, pairing_code
from jumpcodes.lindblad import DecayModel
from jumpcodes.recovery import RecoveryTable

SEED = 12345

# Supports of the three (8,3,3)_4 codewords, 12 kets each.
CODEWORD_SUPPORTS_833 = [
    {
        "00110011", "00111100", "01010101", "01011010", "01100110", "01101001",
        "10010110", "10011001", "10100101", "10101010", "11000011", "11001100",
    },
    {
        "00110110", "00111001", "01010011", "01011100", "01100101", "01101010",
        "10010101", "10011010", "10100011", "10101100", "11000110", "11001001",
    },
    {
        "00110101", "00111010", "01010110", "01011001", "01100011", "01101100",
        "10010011", "10011100", "10100110", "10101001", "11000101", "11001010",
    },
]


@pytest.fixture(scope="session")
def code4():
    """(4,3,1)_2 pairing code."""
    return pairing_code(4)


@pytest.fixture(scope="session")
def code6():
    """(6,10,1)_3 pairing code."""
    return pairing_code(6)


@pytest.fixture(scope="session")
def code833():
    return builtin_833()


@pytest.fixture()
def unit_model():
    """Factory for equal unit decay rates on N qubits."""
    return lambda n: DecayModel.uniform(n, 1.0)


@pytest.fixture(scope="session")
def recoveries4(code4):
    return RecoveryTable(code4).operators()


@pytest.fixture()
def supports_833():
    return [set(s) for s in CODEWORD_SUPPORTS_833]
