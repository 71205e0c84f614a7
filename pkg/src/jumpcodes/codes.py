"""Jump codes: data model, constructions, correction-condition checks and bounds.

A code (N, K, d)_w lives in the span of the weight-w basis words of N qubits,
where equal decay rates make the no-jump evolution a multiple of the
identity. It corrects any d detected jumps when, for every set E of at most
d positions,

    <c_i| J_E^dag J_E |c_j> = delta_ij lambda(E).
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from jumpcodes.designs import SeedFamily, construct_833, seed_from_json, subset_positions, subsets_up_to
from jumpcodes.errors import DomainError
from jumpcodes.lindblad import DecayModel, jump_product, lindblad_ops
from jumpcodes.qstate import BasisState, StateVector, weight_subspace
from jumpcodes.schemas import JumpCodeModel, KetAmplitude

logger = logging.getLogger(__name__)

ORTHONORMAL_TOL = 1e-12
CONDITION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class JumpCode:
    n_qubits: int
    weight: int
    order: int
    codewords: tuple[StateVector, ...]
    phase: float | None = None
    families: SeedFamily | None = None
    label: str = "custom"

    def __post_init__(self) -> None:
        if not self.codewords:
            raise DomainError("a code needs at least one codeword")
        if any(c.n_qubits != self.n_qubits for c in self.codewords):
            raise DomainError(f"all codewords must have {self.n_qubits} qubits")
        for i, c in enumerate(self.codewords):
            weights = {s.weight for s in c.support()}
            if weights != {self.weight}:
                raise DomainError(f"codeword {i} is not supported on weight {self.weight} only: {sorted(weights)}")
        gram = self.basis_matrix().conj().T @ self.basis_matrix()
        if np.abs(gram - np.eye(len(self.codewords))).max() > ORTHONORMAL_TOL:
            raise DomainError("codewords are not orthonormal")

    @property
    def dimension(self) -> int:
        return len(self.codewords)

    K = dimension

    def basis_matrix(self) -> np.ndarray:
        """Codewords as the columns of a 2^N x K matrix."""
        return np.stack([c.amplitudes for c in self.codewords], axis=1)

    def parameters(self) -> str:
        return f"({self.n_qubits},{self.dimension},{self.order})_{self.weight}"


# ------------------------------------------------------------------
# Constructions
# ------------------------------------------------------------------

def encode(seed: SeedFamily) -> JumpCode:
    """Equal-amplitude codewords |c_i> = |B^(i)|^(-1/2) sum_{X in B^(i)} |x>, in family order."""
    seed.check_disjoint()
    codewords = []
    for fam in seed.families:
        amp = 1.0 / math.sqrt(len(fam))
        codewords.append(StateVector.from_kets(seed.n_points, {b: amp for b in fam}))
    return JumpCode(
        n_qubits=seed.n_points,
        weight=seed.w,
        order=seed.d,
        codewords=tuple(codewords),
        families=seed,
        label=f"seed{seed.n_points}-{seed.K}-{seed.d}-{seed.w}",
    )


def pairing_code(n_qubits: int, phi: float = 0.0) -> JumpCode:
    """Complementary pairs (|x> + e^{i phi} |x-bar>)/sqrt(2) over weight-N/2 words, x the smaller word."""
    if n_qubits < 2 or n_qubits % 2:
        raise DomainError(f"complementary pairing needs an even N >= 2, got {n_qubits}")
    phase = complex(math.cos(phi), math.sin(phi))
    codewords = []
    for x in weight_subspace(n_qubits, n_qubits // 2):
        partner = x.complement()
        if x.bits < partner.bits:
            codewords.append(
                StateVector.from_kets(n_qubits, {x.bits: 1 / math.sqrt(2), partner.bits: phase / math.sqrt(2)})
            )
    return JumpCode(
        n_qubits=n_qubits,
        weight=n_qubits // 2,
        order=1,
        codewords=tuple(codewords),
        phase=phi,
        label=f"pairing({n_qubits})",
    )


def builtin_833() -> JumpCode:
    code = encode(construct_833())
    return JumpCode(
        n_qubits=code.n_qubits,
        weight=code.weight,
        order=code.order,
        codewords=code.codewords,
        families=code.families,
        label="builtin-833",
    )


def complement_code(code: JumpCode) -> JumpCode:
    """Apply sigma_x to every qubit: an (N, K, d)_w code becomes an (N, K, d)_{N-w} code."""
    n = code.n_qubits
    # x-bar = (2^N - 1) - x, so flipping every bit reverses the amplitude array
    codewords = tuple(StateVector(n, c.amplitudes[::-1]) for c in code.codewords)
    families = None
    if code.families is not None and code.order <= n - code.weight:
        full = (1 << n) - 1
        seed = code.families
        families = SeedFamily(
            n_points=n,
            w=n - seed.w,
            d=seed.d,
            families=tuple(tuple(b ^ full for b in fam) for fam in seed.families),
        )
    return JumpCode(
        n_qubits=n,
        weight=n - code.weight,
        order=code.order,
        codewords=codewords,
        phase=code.phase,
        families=families,
        label=f"complement({code.label})",
    )


def bare_code(code: JumpCode) -> JumpCode:
    """The unencoded comparison: the first support word of each codeword as a bare basis state."""
    words = [c.support()[0] for c in code.codewords]
    return JumpCode(
        n_qubits=code.n_qubits,
        weight=code.weight,
        order=0,
        codewords=tuple(StateVector.basis(w) for w in words),
        label=f"bare({code.label})",
    )


# ------------------------------------------------------------------
# Verification
# ------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaEntry:
    value: float
    """lambda(E) for the physical operators, including the decay-rate factors."""
    raw: float | None
    """value divided by prod_{alpha in E} kappa_alpha (None when a rate vanishes)."""
    fraction: Fraction | None
    """raw as an exact rational when it is one to 1e-10."""


@dataclass(frozen=True)
class VerificationReport:
    d: int
    passed: bool
    lambda_table: dict[int, LambdaEntry]
    violations: list[tuple[int, int, int, float]] = field(default_factory=list)
    cross_terms_passed: bool | None = None
    cross_term_violations: list[tuple[int, int, int, int, float]] = field(default_factory=list)


def _as_fraction(raw: float) -> Fraction | None:
    frac = Fraction(raw).limit_denominator(1_000_000)
    return frac if abs(float(frac) - raw) < CONDITION_TOL else None


def _delta_violations(M: np.ndarray) -> list[tuple[int, int, float]]:
    """Entries of M breaking the delta_ij lambda structure."""
    out = []
    K = M.shape[0]
    for i in range(K):
        for j in range(K):
            if i != j and abs(M[i, j]) > CONDITION_TOL:
                out.append((i, j, float(abs(M[i, j]))))
        if abs(M[i, i] - M[0, 0]) > CONDITION_TOL:
            out.append((i, i, float(M[i, i].real)))
    return out


def verify_code(code: JumpCode, d: int, model: DecayModel) -> VerificationReport:
    """Evaluate <c_i|J_E^dag J_E|c_j> for all |E| <= d, plus the alpha != beta cross terms."""
    if model.n_qubits != code.n_qubits:
        raise DomainError(f"decay model has {model.n_qubits} qubits, code {code.n_qubits}")
    if not 0 <= d <= code.weight:
        raise DomainError(f"order d={d} outside 0..w={code.weight}; larger jump sets annihilate the code")
    C = code.basis_matrix()
    n = code.n_qubits
    table: dict[int, LambdaEntry] = {}
    violations: list[tuple[int, int, int, float]] = []
    for E in subsets_up_to(n, d):
        positions = subset_positions(E, n)
        image = jump_product(model, positions).matrix @ C
        M = image.conj().T @ image
        violations.extend((i, j, E, v) for i, j, v in _delta_violations(M))
        value = float(M[0, 0].real)
        scale = math.prod(model.kappas[a - 1] for a in positions)
        raw = value / scale if scale > 0 else None
        table[E] = LambdaEntry(value=value, raw=raw, fraction=_as_fraction(raw) if raw is not None else None)

    cross_ok: bool | None = None
    cross: list[tuple[int, int, int, int, float]] = []
    if d >= 1:
        images = [L.matrix @ C for L in lindblad_ops(model)]
        for a in range(n):
            for b in range(a + 1, n):
                M = images[a].conj().T @ images[b]
                cross.extend((a + 1, b + 1, i, j, v) for i, j, v in _delta_violations(M))
        cross_ok = not cross

    report = VerificationReport(
        d=d,
        passed=not violations,
        lambda_table=table,
        violations=violations,
        cross_terms_passed=cross_ok,
        cross_term_violations=cross,
    )
    logger.debug(
        "Verified %s %s at d=%d: passed=%s cross_terms=%s",
        code.label, code.parameters(), d, report.passed, cross_ok,
    )
    return report


# ------------------------------------------------------------------
# Bounds
# ------------------------------------------------------------------

def upper_bound(N: int, w: int, d: int) -> int:
    """K <= min{C(N-d, w-d), C(N-d, w)}; d = 0 gives the full weight-w dimension."""
    if not 0 <= d <= w <= N:
        raise DomainError(f"need 0 <= d <= w <= N, got N={N}, w={w}, d={d}")
    return min(math.comb(N - d, w - d), math.comb(N - d, w))


def max_upper_bound(N: int, d: int) -> int:
    """Bound maximized over the weight, attained at w = floor(N/2)."""
    if not 0 <= d <= N // 2:
        raise DomainError(f"need 0 <= d <= floor(N/2), got N={N}, d={d}")
    return math.comb(N - d, N // 2 - d)


# ------------------------------------------------------------------
# Serialization and lookup
# ------------------------------------------------------------------

def code_to_json(code: JumpCode) -> str:
    words = []
    for c in code.codewords:
        words.append([
            KetAmplitude(ket=BasisState(int(i), code.n_qubits).to_string(), re=float(a.real), im=float(a.imag))
            for i, a in enumerate(c.amplitudes)
            if a != 0
        ])
    model = JumpCodeModel(
        N=code.n_qubits, w=code.weight, d=code.order, K=code.dimension, phase=code.phase, codewords=words
    )
    return model.model_dump_json(indent=2)


def code_from_json(text: str | bytes, label: str = "json") -> JumpCode:
    model = JumpCodeModel.model_validate(json.loads(text))
    codewords = tuple(
        StateVector.from_kets(model.N, {k.ket: complex(k.re, k.im) for k in word}) for word in model.codewords
    )
    return JumpCode(
        n_qubits=model.N, weight=model.w, order=model.d, codewords=codewords, phase=model.phase, label=label
    )


_PAIRING = re.compile(r"^pairing\(\s*(\d+)\s*(?:,\s*([-+0-9.eE]+)\s*)?\)$")


def code_from_spec(spec: str, phi: float | None = None) -> JumpCode:
    """Resolve ``pairing(N[,phi])``, ``builtin-833`` or a SEED / code JSON file."""
    spec = spec.strip()
    m = _PAIRING.match(spec)
    if m:
        phase = float(m.group(2)) if m.group(2) else (phi or 0.0)
        return pairing_code(int(m.group(1)), phase)
    if spec == "builtin-833":
        return builtin_833()
    path = Path(spec)
    if path.suffix == ".json" and path.exists():
        text = path.read_text()
        if "families" in json.loads(text):
            code = encode(seed_from_json(text))
        else:
            code = code_from_json(text, label=path.stem)
        return code
    raise DomainError(f"unknown code spec {spec!r}")
