"""Shaping of verification reports into their JSON form (CLI output and API responses)."""

from __future__ import annotations

import logging
from dataclasses import replace

from jumpcodes.codes import JumpCode, verify_code
from jumpcodes.designs import subset_positions, verify_seed
from jumpcodes.lindblad import DecayModel
from jumpcodes.schemas import LambdaOut, VerificationOut, ViolationOut

logger = logging.getLogger(__name__)


def verification_out(code: JumpCode, d: int) -> VerificationOut:
    """Evaluate the correction conditions at equal unit rates and shape the report.

    Codes built from a SEED also have their families checked at the same
    order; the verdict is the conjunction of both checks.
    """
    report = verify_code(code, d, DecayModel.uniform(code.n_qubits, 1.0))
    n = code.n_qubits
    passed = report.passed
    if code.families is not None and d <= code.families.w:
        seed_report = verify_seed(replace(code.families, d=d))
        logger.info("SEED condition at d=%d: %s", d, "passed" if seed_report.passed else "violated")
        passed = passed and seed_report.passed
    logger.info("%s %s at d=%d: %s", code.label, code.parameters(), d, "passed" if passed else "violated")
    return VerificationOut(
        code=code.label,
        N=n,
        w=code.weight,
        K=code.dimension,
        d=d,
        passed=passed,
        cross_terms_passed=report.cross_terms_passed,
        lambda_table=[
            LambdaOut(
                E=list(subset_positions(E, n)),
                fraction=str(entry.fraction) if entry.fraction is not None else None,
                value=entry.value,
            )
            for E, entry in report.lambda_table.items()
        ],
        violations=[
            ViolationOut(i=i, j=j, E=list(subset_positions(E, n)), value=v) for i, j, E, v in report.violations
        ],
    )
