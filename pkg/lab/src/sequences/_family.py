"""Frequency and amplitude sequences (k_j, gamma_j) and the initial data."""

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from pydantic import BaseModel, ConfigDict, model_validator

from ..errors import ArgumentError, CapacityError
from ..spline_profiles import SpectralProfile, indicator_piece

logger = logging.getLogger(__name__)

MAGNITUDE_CAP = 2**60
K_FLOOR = 64


class SequenceFamily(BaseModel):
    """Parameters plus the sequences k_j, gamma_j for j = N ... floor((1+delta) N)."""

    model_config = ConfigDict(frozen=True)

    ell: int
    p: float
    q: float
    epsilon: float
    delta: float
    M: int
    N: int
    k_seq: list[int]
    gamma_seq: list[float]
    strict_separation: bool = False

    @model_validator(mode="after")
    def _aligned_sequences(self) -> "SequenceFamily":
        expected = last_index(self.N, self.delta) - self.N + 1
        if len(self.k_seq) != expected or len(self.gamma_seq) != expected:
            raise ValueError(
                f"k_seq and gamma_seq need {expected} entries for N={self.N}, "
                f"delta={self.delta}"
            )
        return self

    @property
    def m(self) -> float:
        """(2 ell - 1)/(2 ell + 1)."""
        return regularity(self.ell)

    @property
    def indices(self) -> range:
        """Index range N ... floor((1+delta) N)."""
        return range(self.N, last_index(self.N, self.delta) + 1)

    @property
    def k_N(self) -> int:
        """Smallest frequency of the family."""
        return self.k_seq[0]

    def k(self, j: int) -> int:
        return self.k_seq[j - self.N]

    def gamma(self, j: int) -> float:
        return self.gamma_seq[j - self.N]

    def partner(self, j: int) -> int:
        """2 ell k_j + M, the second frequency of index j."""
        return 2 * self.ell * self.k(j) + self.M

    def frequencies(self, j: int) -> tuple[int, int, int, int]:
        """Lambda(k_j) in ascending order."""
        a, b = self.k(j), self.partner(j)
        return (-b, -a, a, b)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SequenceFamily":
        """Load a family; validation of (a)-(d) is left to ``validate_family``."""
        return cls.model_validate_json(text)


@dataclass(frozen=True)
class ConditionResult:
    """One growth condition evaluated on a family."""

    name: str
    passed: bool
    detail: str = ""


def regularity(ell: int) -> float:
    return (2 * ell - 1) / (2 * ell + 1)


def last_index(N: int, delta: float) -> int:
    return math.floor((1.0 + delta) * N)


def _next_power_of_two(x: int | Fraction) -> int:
    """Smallest power of two strictly greater than ``x`` (x >= 0)."""
    return 1 << math.floor(x).bit_length()


def check_parameters(
    ell: int, p: float, q: float, epsilon: float, delta: float, M: int, N: int
) -> None:
    """Reject parameters outside the admissible range.

    Raises:
        ArgumentError: Naming the first violated constraint
    """
    if not isinstance(ell, int) or ell < 1:
        raise ArgumentError(f"ell must be a positive integer, got {ell!r}")
    if not isinstance(N, int) or N < 1:
        raise ArgumentError(f"N must be a positive integer, got {N!r}")
    if not p >= 1 or not q >= 1:
        raise ArgumentError("p and q must be >= 1")
    if not 0 < epsilon < q / (2 * ell + 1) - 1:
        raise ArgumentError(
            f"epsilon must satisfy 0 < epsilon < q/(2 ell + 1) - 1 = "
            f"{q / (2 * ell + 1) - 1}, got {epsilon}"
        )
    if float(M) != int(M):
        raise ArgumentError(f"M must be an integer, got {M!r}")
    if not M > 2 * ell + 2:
        raise ArgumentError(f"M must exceed 2 ell + 2 = {2 * ell + 2}, got {M}")
    if not delta >= 0:
        raise ArgumentError(f"delta must be non-negative, got {delta}")


def condition_b_sides(family: SequenceFamily) -> tuple[float, float]:
    """(sum_j j^(-m (1+eps)/q), k_N^(1/(2 ell+1)) / N)."""
    exponent = family.m * (1.0 + family.epsilon) / family.q
    lhs = math.fsum(j**-exponent for j in family.indices)
    rhs = float(family.k_N) ** (1.0 / (2 * family.ell + 1)) / family.N
    return lhs, rhs


def _separation_floor(ell: int, M: int, k: int, strict: bool) -> int | Fraction:
    floor = (ell * ell + 1) * k + M
    if strict:
        floor = max(floor, Fraction(4, 3) * (2 * ell + 1) * (2 * ell * k + M))
    return floor


def _gamma(j: int, k: int, ell: int, q: float, epsilon: float) -> float:
    return j ** (-(1.0 + epsilon) / q) * float(k) ** -regularity(ell)


def _build(
    params: dict, k_first: int, strict: bool
) -> tuple[list[int], list[float]] | None:
    ell, M = params["ell"], params["M"]
    ks = [k_first]
    for _ in range(last_index(params["N"], params["delta"]) - params["N"]):
        ks.append(_next_power_of_two(_separation_floor(ell, M, ks[-1], strict)))
    if 2 * ell * ks[-1] + M > MAGNITUDE_CAP:
        return None
    start = params["N"]
    gammas = [
        _gamma(start + i, k, ell, params["q"], params["epsilon"])
        for i, k in enumerate(ks)
    ]
    return ks, gammas


def generate_family(
    ell: int,
    p: float,
    q: float,
    epsilon: float,
    delta: float,
    M: int,
    N: int,
    strict_separation: bool = False,
) -> SequenceFamily:
    """Deterministically construct a family satisfying conditions (a)-(d).

    k_N starts at the smallest power of two above max(2(2 ell+1) M, 64); each
    further k is the smallest power of two above (ell^2+1) k + M (and above
    (4/3)(2 ell+1)(2 ell k + M) under ``strict_separation``). k_N doubles until
    condition (b) holds.

    Raises:
        ArgumentError: If a parameter is out of range
        CapacityError: If (b) needs frequencies beyond 2^60
    """
    check_parameters(ell, p, q, epsilon, delta, M, N)
    M = int(M)
    params = dict(ell=ell, p=p, q=q, epsilon=epsilon, delta=delta, M=M, N=N)
    k_first = _next_power_of_two(max(2 * (2 * ell + 1) * M, K_FLOOR))
    while True:
        built = _build(params, k_first, strict_separation)
        if built is None:
            raise CapacityError(
                f"condition (b) needs frequencies beyond 2^60 for ell={ell}, N={N}, "
                f"delta={delta}; use a smaller N or delta"
            )
        ks, gammas = built
        family = SequenceFamily(
            **params, k_seq=ks, gamma_seq=gammas, strict_separation=strict_separation
        )
        lhs, rhs = condition_b_sides(family)
        if lhs < rhs:
            break
        k_first *= 2

    failed = [c for c in validate_family(family) if not c.passed]
    if failed:
        first = failed[0]
        raise ArgumentError(f"generated family violates {first.name}: {first.detail}")
    logger.info(
        f"Generated family ell={ell} N={N}: {len(ks)} indices, "
        f"k_N=2^{ks[0].bit_length() - 1}, hash {family_hash(family)}"
    )
    return family


def validate_family(family: SequenceFamily) -> list[ConditionResult]:
    """Evaluate the parameter constraints, conditions (a)-(d) and the 2^60 cap."""
    ell, M = family.ell, family.M
    results = []
    try:
        check_parameters(
            ell, family.p, family.q, family.epsilon, family.delta, M, family.N
        )
        results.append(ConditionResult("parameters", True))
    except ArgumentError as e:
        results.append(ConditionResult("parameters", False, str(e)))

    growth = ell * ell if ell > 1 else 2
    bad = [
        (a, b)
        for a, b in zip(family.k_seq, family.k_seq[1:])
        if not b > growth * a + M
    ]
    detail = f"k_(j+1) <= {growth} k_j + M at {bad[0]}" if bad else ""
    results.append(ConditionResult("a", not bad, detail))

    lhs, rhs = condition_b_sides(family)
    results.append(ConditionResult("b", lhs < rhs, f"sum={lhs!r}, bound={rhs!r}"))

    results.append(
        ConditionResult(
            "c",
            (2 * ell + 1) * M * 2 < family.k_N,
            f"(2 ell+1) M = {(2 * ell + 1) * M}, k_N/2 = {family.k_N / 2}",
        )
    )

    worst = 0.0
    for j, k, g in zip(family.indices, family.k_seq, family.gamma_seq):
        expected = _gamma(j, k, ell, family.q, family.epsilon)
        worst = max(worst, abs(g - expected) / expected)
    results.append(
        ConditionResult("d", worst <= 1e-12, f"max relative error {worst!r}")
    )

    top = 2 * ell * max(family.k_seq) + M
    positive = all(k > 0 for k in family.k_seq)
    results.append(
        ConditionResult(
            "cap", positive and top <= MAGNITUDE_CAP, f"largest frequency {top}"
        )
    )
    return results


def family_hash(family: SequenceFamily) -> str:
    """First 16 hex digits of the sha256 of the canonical JSON form."""
    canonical = json.dumps(family.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def build_initial_data(family: SequenceFamily) -> SpectralProfile:
    """phi^(N) = sum_j gamma_j (P_(k_j) + P_(2 ell k_j + M)).

    Returns:
        Hermitian profile of 4 bumps per index, ordered +-k_j then +-partner
    """
    pieces = []
    for j in family.indices:
        g = family.gamma(j)
        for center in (family.k(j), family.partner(j)):
            pieces.append(indicator_piece(center, g))
            pieces.append(indicator_piece(-center, g))
    return SpectralProfile(tuple(pieces))
