"""Incidence structures, permutation-group orbits and spontaneous-emission error designs.

Subsets of the point set V = {1..N} are bitmasks laid out like basis words:
point 1 is the most significant bit, so the block {3,4,7,8} of N=8 points is
the mask of ``|00110011>``. Blocks are kept in ascending mask order.
"""

from __future__ import annotations

import json
import re
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from jumpcodes.errors import DomainError
from jumpcodes.qstate import MAX_QUBITS, position_bit
from jumpcodes.schemas import SeedFamilyModel


def subset_mask(points: Iterable[int], n_points: int) -> int:
    mask = 0
    for alpha in points:
        mask |= position_bit(alpha, n_points)
    return mask


def subset_positions(mask: int, n_points: int) -> tuple[int, ...]:
    return tuple(a for a in range(1, n_points + 1) if mask & position_bit(a, n_points))


def subsets_up_to(n_points: int, d: int) -> list[int]:
    """Masks of all E with |E| <= d, ordered by size and then lexicographically."""
    out = []
    for size in range(d + 1):
        for combo in combinations(range(1, n_points + 1), size):
            out.append(subset_mask(combo, n_points))
    return out


# ------------------------------------------------------------------
# Incidence structures
# ------------------------------------------------------------------

@dataclass(frozen=True)
class IncidenceStructure:
    n_points: int
    blocks: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.n_points <= MAX_QUBITS:
            raise DomainError(f"n_points must lie in 1..{MAX_QUBITS}, got {self.n_points}")
        full = (1 << self.n_points) - 1
        for b in self.blocks:
            if b & ~full or b < 0:
                raise DomainError(f"block {b:#x} is not a subset of {{1..{self.n_points}}}")
        object.__setattr__(self, "blocks", tuple(sorted(self.blocks)))

    @classmethod
    def from_sets(cls, n_points: int, blocks: Iterable[Iterable[int]]) -> IncidenceStructure:
        return cls(n_points, tuple(subset_mask(b, n_points) for b in blocks))

    @property
    def constant_block_size(self) -> bool:
        return len({b.bit_count() for b in self.blocks}) <= 1

    def blocks_through(self, E: int) -> int:
        """|B_E|, the number of blocks containing every point of E."""
        return sum(1 for b in self.blocks if b & E == E)


def complete_graph(n_points: int) -> IncidenceStructure:
    return IncidenceStructure.from_sets(n_points, combinations(range(1, n_points + 1), 2))


def path_graph(n_points: int) -> IncidenceStructure:
    return IncidenceStructure.from_sets(n_points, ((a, a + 1) for a in range(1, n_points)))


@dataclass(frozen=True)
class Regularity:
    d: int
    lambda_d: int | None
    witness: tuple[tuple[int, int], tuple[int, int]] | None = None

    @property
    def regular(self) -> bool:
        return self.lambda_d is not None


def regularity(structure: IncidenceStructure, d: int) -> Regularity:
    """Check that every d-subset of points lies in the same number of blocks.

    A violation carries two (E mask, |B_E|) pairs with different counts.
    """
    if not structure.blocks:
        raise DomainError("incidence structure has no blocks")
    min_size = min(b.bit_count() for b in structure.blocks)
    if not 1 <= d <= min_size:
        raise DomainError(f"order d={d} outside 1..{min_size} (smallest block size)")
    first: tuple[int, int] | None = None
    for combo in combinations(range(1, structure.n_points + 1), d):
        E = subset_mask(combo, structure.n_points)
        count = structure.blocks_through(E)
        if first is None:
            first = (E, count)
        elif count != first[1]:
            return Regularity(d, None, (first, (E, count)))
    return Regularity(d, first[1] if first else 0)


# ------------------------------------------------------------------
# Permutation groups
# ------------------------------------------------------------------

Permutation = tuple[int, ...]
"""Images of points 1..N: ``perm[a - 1]`` is the image of point ``a``."""

_CYCLE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: int) -> Permutation:
    """Parse cycle notation such as ``"(1 2)(3 4)"`` into an image tuple."""
    images = list(range(1, degree + 1))
    seen: set[int] = set()
    stripped = _CYCLE.sub("", text).strip()
    if stripped:
        raise DomainError(f"unparseable cycle notation: {text!r}")
    for body in _CYCLE.findall(text):
        points = [int(p) for p in re.split(r"[\s,]+", body.strip()) if p]
        if any(not 1 <= p <= degree for p in points) or seen & set(points) or len(set(points)) != len(points):
            raise DomainError(f"invalid cycle ({body}) for degree {degree}")
        seen |= set(points)
        for a, b in zip(points, points[1:] + points[:1]):
            images[a - 1] = b
    return tuple(images)


def format_cycles(perm: Permutation) -> str:
    seen: set[int] = set()
    parts = []
    for start in range(1, len(perm) + 1):
        if start in seen or perm[start - 1] == start:
            continue
        cycle, a = [], start
        while a not in seen:
            seen.add(a)
            cycle.append(a)
            a = perm[a - 1]
        parts.append("(" + " ".join(map(str, cycle)) + ")")
    return "".join(parts) or "()"


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Apply ``q`` first, then ``p``."""
    return tuple(p[q[a] - 1] for a in range(len(q)))


def act(perm: Permutation, mask: int, degree: int) -> int:
    """Image of a point subset under a permutation."""
    out = 0
    for a in range(1, degree + 1):
        if mask & position_bit(a, degree):
            out |= position_bit(perm[a - 1], degree)
    return out


@dataclass(frozen=True)
class PermGroup:
    degree: int
    generators: tuple[Permutation, ...]

    def __post_init__(self) -> None:
        target = tuple(range(1, self.degree + 1))
        for g in self.generators:
            if len(g) != self.degree or tuple(sorted(g)) != target:
                raise DomainError(f"generator {g} is not a permutation of 1..{self.degree}")

    @classmethod
    def from_cycles(cls, degree: int, generators: Iterable[str]) -> PermGroup:
        return cls(degree, tuple(parse_cycles(g, degree) for g in generators))


def orbit(group: PermGroup, seed_block: int | Iterable[int]) -> list[int]:
    """Breadth-first closure of a subset under the generators, ascending masks."""
    if not isinstance(seed_block, int):
        seed_block = subset_mask(seed_block, group.degree)
    if seed_block >> group.degree:
        raise DomainError(f"seed block {seed_block:#x} is not a subset of 1..{group.degree}")
    found = {seed_block}
    queue = deque([seed_block])
    while queue:
        block = queue.popleft()
        for g in group.generators:
            image = act(g, block, group.degree)
            if image not in found:
                found.add(image)
                queue.append(image)
    return sorted(found)


def group_order(group: PermGroup) -> int:
    if group.degree > 16:
        raise DomainError(f"group enumeration limited to degree 16, got {group.degree}")
    identity = tuple(range(1, group.degree + 1))
    elements = {identity}
    queue = deque([identity])
    while queue:
        element = queue.popleft()
        for g in group.generators:
            product = compose(g, element)
            if product not in elements:
                elements.add(product)
                queue.append(product)
    return len(elements)


# ------------------------------------------------------------------
# Spontaneous-emission error designs
# ------------------------------------------------------------------

@dataclass(frozen=True)
class SeedFamily:
    """K block families B^(1..K) of w-subsets, intended to be pairwise disjoint."""

    n_points: int
    w: int
    d: int
    families: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not 1 <= self.n_points <= MAX_QUBITS:
            raise DomainError(f"n_points must lie in 1..{MAX_QUBITS}, got {self.n_points}")
        if not 0 <= self.d <= self.w <= self.n_points:
            raise DomainError(f"need 0 <= d <= w <= N, got d={self.d}, w={self.w}, N={self.n_points}")
        families = tuple(tuple(sorted(f)) for f in self.families)
        for fam in families:
            for b in fam:
                if b >> self.n_points or b.bit_count() != self.w:
                    raise DomainError(f"block {subset_positions(b, self.n_points)} is not a {self.w}-subset")
        object.__setattr__(self, "families", families)

    @property
    def K(self) -> int:
        return len(self.families)

    def check_disjoint(self) -> None:
        seen: dict[int, int] = {}
        for i, fam in enumerate(self.families):
            if len(set(fam)) != len(fam):
                raise DomainError(f"family {i + 1} repeats a block")
            for b in fam:
                if b in seen:
                    raise DomainError(
                        f"block {subset_positions(b, self.n_points)} in families {seen[b] + 1} and {i + 1}"
                    )
                seen[b] = i


@dataclass(frozen=True)
class SeedReport:
    passed: bool
    lambda_table: dict[int, Fraction]
    violation: tuple[int, int, int] | None = None


def verify_seed(seed: SeedFamily) -> SeedReport:
    """Check |B^(i)_E| / |B^(i)| is the same for all families i, for every |E| <= d.

    On failure ``violation`` is (E mask, i, j) with 0-based family indices.
    """
    if not seed.families or any(not f for f in seed.families):
        raise DomainError("SEED needs non-empty families")
    seed.check_disjoint()
    structures = [IncidenceStructure(seed.n_points, fam) for fam in seed.families]
    table: dict[int, Fraction] = {}
    for E in subsets_up_to(seed.n_points, seed.d):
        ratios = [Fraction(s.blocks_through(E), len(s.blocks)) for s in structures]
        for j, r in enumerate(ratios[1:], start=1):
            if r != ratios[0]:
                return SeedReport(False, table, (E, 0, j))
        table[E] = ratios[0]
    return SeedReport(True, table)


EIGHT_POINT_GENERATORS = (
    "(1 2)(3 4)",
    "(1 4)(2 3)",
    "(5 6)(7 8)",
    "(5 8)(6 7)",
    "(1 2 3)(5 6 7)",
)
EIGHT_POINT_SEEDS = ((1, 2, 5, 6), (1, 3, 5, 6), (1, 4, 5, 6))


def eight_point_group() -> PermGroup:
    return PermGroup.from_cycles(8, EIGHT_POINT_GENERATORS)


def construct_833() -> SeedFamily:
    """3-SEED(8,4,3): orbits of three 4-subsets under an order-48 group on 8 points."""
    group = eight_point_group()
    families = tuple(tuple(orbit(group, seed)) for seed in EIGHT_POINT_SEEDS)
    return SeedFamily(n_points=8, w=4, d=3, families=families)


# ------------------------------------------------------------------
# JSON text format
# ------------------------------------------------------------------

def seed_to_json(seed: SeedFamily) -> str:
    model = SeedFamilyModel(
        n_points=seed.n_points,
        w=seed.w,
        d=seed.d,
        families=[[list(subset_positions(b, seed.n_points)) for b in fam] for fam in seed.families],
    )
    return model.model_dump_json(indent=2)


def seed_from_json(text: str | bytes) -> SeedFamily:
    model = SeedFamilyModel.model_validate(json.loads(text))
    return SeedFamily(
        n_points=model.n_points,
        w=model.w,
        d=model.d,
        families=tuple(
            tuple(subset_mask(block, model.n_points) for block in fam) for fam in model.families
        ),
    )


def blocks_from_kets(kets: Sequence[str]) -> tuple[int, ...]:
    """Blocks read off basis-word labels (excited positions)."""
    return tuple(sorted(int(k, 2) for k in kets))
