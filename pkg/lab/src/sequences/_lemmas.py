"""Decision procedures for the sum lemmas on interaction tuples.

All arithmetic is on Python integers, so every verdict is exact.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ._family import SequenceFamily
from ._tuples import FrequencyTuple

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundCheck:
    """One inequality lhs >= rhs; ``applicable`` False means hypotheses fail."""

    applicable: bool
    passed: bool
    lhs: Fraction | int | None = None
    rhs: Fraction | int | None = None
    witness: int | None = None


NOT_APPLICABLE = BoundCheck(applicable=False, passed=True)


@dataclass(frozen=True)
class LemmaRecord:
    """Verdicts of all bounds for a single tuple."""

    item: FrequencyTuple
    exceptional: bool
    checks: dict[str, BoundCheck] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [name for name, c in self.checks.items() if not c.passed]


def is_exceptional(item: FrequencyTuple, M: int) -> bool:
    """Tuple sum equals +-M."""
    return abs(item.total) == M


def is_resonant_configuration(item: FrequencyTuple, family: SequenceFamily) -> bool:
    """Single index, one entry +-(2 ell k_j + M) and 2 ell entries -+k_j."""
    if not item.diagonal or item.order != family.ell:
        return False
    j = item.indices[0]
    big = family.partner(j)
    large = [c for c in item.entries if abs(c) == big]
    if len(large) != 1:
        return False
    sign = 1 if large[0] > 0 else -1
    rest = [c for c in item.entries if abs(c) != big]
    return all(c == -sign * family.k(j) for c in rest)


def triangle_check(values: Sequence[int]) -> BoundCheck:
    """|x_1 + ... + x_n| <= |x_1| + ... + |x_n| - 2 |x_j| for x_j opposing the sum.

    Every entry with x_j * sum <= 0 is tested; the tightest one is the witness.

    Examples:
        - (3, -1, 2) -> |4| <= 6 - 2 = 4, passes with equality
        - (1, 2, 3) -> not applicable
    """
    total = sum(values)
    abs_total = sum(abs(v) for v in values)
    candidates = [i for i, v in enumerate(values) if v != 0 and v * total <= 0]
    if not candidates:
        return NOT_APPLICABLE
    worst = max(candidates, key=lambda i: abs(values[i]))
    rhs = abs_total - 2 * abs(values[worst])
    return BoundCheck(True, abs(total) <= rhs, abs(total), rhs, worst)


def _smallest_index(family: SequenceFamily, item: FrequencyTuple) -> int:
    return min(set(item.indices), key=family.k)


def sum_lemma_check(family: SequenceFamily, item: FrequencyTuple) -> LemmaRecord:
    """Evaluate every sum bound whose hypotheses apply to ``item``.

    Checks:
        single_sum: single index, mixed signs, sum != +-M -> |sum| >= k_j/2
        single_gap: single index, mixed signs -> sum|c| - |sum| >= 2 k_j
        resonance: single index -> (sum = +-M) iff resonant configuration, k = ell
        mixed_sum: several indices, sum != +-M -> |sum| >= k_i/4 for some index i
        mixed_gap: several indices, mixed signs -> sum|c| - |sum| >= 2 k_i
        largest_entry: max(|sum|, sum|c| - |sum|) >= max|c|/2
    """
    M = family.M
    total = abs(item.total)
    gap = item.abs_total - total
    exceptional = is_exceptional(item, M)
    checks: dict[str, BoundCheck] = {}

    if item.diagonal:
        j = item.indices[0]
        kj = family.k(j)
        if not item.same_sign and not exceptional:
            rhs = Fraction(kj, 2)
            checks["single_sum"] = BoundCheck(True, total >= rhs, total, rhs, j)
        else:
            checks["single_sum"] = NOT_APPLICABLE
        if not item.same_sign:
            checks["single_gap"] = BoundCheck(True, gap >= 2 * kj, gap, 2 * kj, j)
        else:
            checks["single_gap"] = NOT_APPLICABLE
        resonant = is_resonant_configuration(item, family)
        agrees = exceptional == (resonant and item.order == family.ell)
        checks["resonance"] = BoundCheck(
            True, agrees, int(exceptional), int(resonant), j
        )
        checks["mixed_sum"] = NOT_APPLICABLE
        checks["mixed_gap"] = NOT_APPLICABLE
    else:
        checks["single_sum"] = NOT_APPLICABLE
        checks["single_gap"] = NOT_APPLICABLE
        checks["resonance"] = NOT_APPLICABLE
        i2 = _smallest_index(family, item)
        if not exceptional:
            # largest index first: the witness of choice under strict separation
            witness = next(
                (
                    s
                    for s in sorted(set(item.indices), reverse=True)
                    if total >= Fraction(family.k(s), 4)
                ),
                None,
            )
            rhs = Fraction(family.k(witness if witness is not None else i2), 4)
            checks["mixed_sum"] = BoundCheck(
                True, witness is not None, total, rhs, witness
            )
        else:
            checks["mixed_sum"] = NOT_APPLICABLE
        if not item.same_sign:
            rhs = 2 * family.k(i2)
            checks["mixed_gap"] = BoundCheck(True, gap >= rhs, gap, rhs, i2)
        else:
            checks["mixed_gap"] = NOT_APPLICABLE

    largest = max(abs(c) for c in item.entries)
    lhs = max(total, gap)
    checks["largest_entry"] = BoundCheck(
        True, lhs >= Fraction(largest, 2), lhs, Fraction(largest, 2)
    )
    record = LemmaRecord(item, exceptional, checks)
    if not record.passed:
        logger.debug(f"sum bounds fail for {item.entries}: {record.failures}")
    return record
