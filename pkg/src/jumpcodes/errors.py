"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class JumpCodeError(Exception):
    """Base class for errors raised by jumpcodes."""


class DomainError(JumpCodeError, ValueError):
    """Invalid parameters or mismatched dimensions."""


class NumericError(JumpCodeError, ArithmeticError):
    """Non-finite values, norm underflow or integrator drift."""


class ConditionViolation(JumpCodeError):
    """A correction condition required by the operation does not hold."""
