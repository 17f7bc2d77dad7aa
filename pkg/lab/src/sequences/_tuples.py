"""Interaction tuples (c_1, ..., c_{2k+1}) drawn from Lambda(k_s)."""

import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, Literal

from ..errors import ArgumentError
from ._family import SequenceFamily

logger = logging.getLogger(__name__)

Mode = Literal["diagonal", "off_diagonal", "all"]
MODES = ("diagonal", "off_diagonal", "all")


@dataclass(frozen=True)
class FrequencyTuple:
    """Entries c_i with their family indices s_i and derived flags."""

    entries: tuple[int, ...]
    indices: tuple[int, ...]
    diagonal: bool
    same_sign: bool
    total: int

    @classmethod
    def from_pairs(cls, pairs: tuple[tuple[int, int], ...]) -> "FrequencyTuple":
        """Build from ((s_1, c_1), ..., (s_n, c_n))."""
        indices = tuple(s for s, _ in pairs)
        entries = tuple(c for _, c in pairs)
        return cls(
            entries=entries,
            indices=indices,
            diagonal=len(set(indices)) == 1,
            same_sign=all(c > 0 for c in entries) or all(c < 0 for c in entries),
            total=sum(entries),
        )

    @property
    def order(self) -> int:
        """k for a tuple of length 2k+1."""
        return (len(self.entries) - 1) // 2

    @property
    def abs_total(self) -> int:
        """sum |c_i|."""
        return sum(abs(c) for c in self.entries)

    def is_exceptional(self, M: int) -> bool:
        """Sum equal to +-M."""
        return abs(self.total) == M

    def negated(self) -> "FrequencyTuple":
        """The sign-flipped partner tuple."""
        return FrequencyTuple(
            tuple(-c for c in self.entries),
            self.indices,
            self.diagonal,
            self.same_sign,
            -self.total,
        )


def _options(family: SequenceFamily, j: int) -> list[tuple[int, int]]:
    return [(j, c) for c in family.frequencies(j)]


def count_tuples(family: SequenceFamily, k: int, mode: Mode = "all") -> int:
    """Number of tuples ``enumerate_tuples`` yields, without enumerating."""
    n = 2 * k + 1
    width = len(family.indices)
    diagonal = width * 4**n
    if mode == "diagonal":
        return diagonal
    total = (4 * width) ** n
    return total if mode == "all" else total - diagonal


def enumerate_tuples(
    family: SequenceFamily, k: int, mode: Mode = "all"
) -> Iterator[FrequencyTuple]:
    """Stream tuples of length 2k+1 in lexicographic (s_1, c_1, s_2, c_2, ...) order.

    Args:
        family: Sequence family supplying k_j, ell and M
        k: Order, 1 <= k <= ell
        mode: ``diagonal`` (all s_i equal), ``off_diagonal`` or ``all``

    Raises:
        ArgumentError: If k is out of range or the mode is unknown

    Examples:
        - ell=1, k=1, one index, diagonal -> 64 tuples, 16 of them same-sign
    """
    if not isinstance(k, int) or not 1 <= k <= family.ell:
        raise ArgumentError(f"order k must lie in 1..{family.ell}, got {k!r}")
    if mode not in MODES:
        raise ArgumentError(f"unknown mode {mode!r}, expected one of {MODES}")
    n = 2 * k + 1
    if mode == "diagonal":
        for j in family.indices:
            for pairs in itertools.product(_options(family, j), repeat=n):
                yield FrequencyTuple.from_pairs(pairs)
        return
    options = [o for j in family.indices for o in _options(family, j)]
    for pairs in itertools.product(options, repeat=n):
        item = FrequencyTuple.from_pairs(pairs)
        if mode == "off_diagonal" and item.diagonal:
            continue
        yield item
