"""Assembly of the second-iterate components f_k from R-terms."""

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .. import config
from ..errors import ArgumentError, CapacityError
from ..schemas import QuadratureSpec
from ..sequences import FrequencyTuple, SequenceFamily, count_tuples, enumerate_tuples
from ..spline_profiles import (
    UNDERFLOW_EXPONENT,
    ProfilePiece,
    SpectralProfile,
    semigroup_apply,
)
from ._r_term import check_tensor_budget, duhamel_factor, slice_integrals

logger = logging.getLogger(__name__)

LOWER_BUCKETS = ("J", "HF")
TOP_BUCKETS = ("J", "HF1", "HF2")


def component_prefactor(k: int, mode: str = "pi") -> float:
    """(-1)^k / (pi (2k+1)), or (-1)^k / (2k+1) in ``no_pi`` mode."""
    sign = -1.0 if k % 2 else 1.0
    if mode == "pi":
        return sign / (math.pi * (2 * k + 1))
    if mode == "no_pi":
        return sign / (2 * k + 1)
    raise ArgumentError(f"unknown prefactor mode {mode!r}")


def classify(item: FrequencyTuple, k: int, ell: int, M: int) -> str | None:
    """Bucket of a tuple; None for same-sign tuples, which contribute nothing."""
    if item.same_sign:
        return None
    if not item.diagonal:
        return "HF2" if k == ell else "HF"
    if k < ell:
        return "J"
    return "J" if abs(item.total) == M else "HF1"


@dataclass
class _GroupAmplitude:
    """gamma-weighted sum of E(R) over tuples sharing one sum(c)."""

    freqs: list[FrequencyTuple]
    weights: np.ndarray
    nodes: int
    factor: object
    _cache: dict = field(default_factory=dict, repr=False)

    def _value(self, z: float) -> float:
        if z not in self._cache:
            values = slice_integrals(self.freqs, z, self.nodes, self.factor)
            self._cache[z] = float(values @ self.weights)
        return self._cache[z]

    def __call__(self, zeta: np.ndarray) -> np.ndarray:
        zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
        return np.array([self._value(float(z)) for z in zeta.ravel()]).reshape(
            zeta.shape
        )


@dataclass(frozen=True)
class IterateComponent:
    """f_k at time t split into buckets.

    Bucket profiles hold E(J), E(HF) (or E(J), E(HF_1), E(HF_2) for k = ell)
    without the prefactor; ``profile()`` applies it.
    """

    k: int
    ell: int
    t: float
    window: tuple[float, float]
    prefactor: float
    parts: dict[str, SpectralProfile]
    counts: dict[str, int] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    @property
    def diagonal(self) -> SpectralProfile:
        """E(J_k)."""
        return self.parts["J"]

    @property
    def off_diagonal(self) -> SpectralProfile:
        """Everything except E(J_k)."""
        rest = SpectralProfile()
        for name, part in self.parts.items():
            if name != "J":
                rest = rest + part
        return rest

    def profile(self) -> SpectralProfile:
        """The full component f_k including its prefactor."""
        total = SpectralProfile()
        for part in self.parts.values():
            total = total + part
        return total.scaled(self.prefactor)


def _tuple_weight(family: SequenceFamily, item: FrequencyTuple) -> float:
    return math.prod(family.gamma(s) for s in item.indices)


def _knots(n: int) -> tuple[float, ...]:
    return tuple(float(v) for v in range(-n, n + 1, 2))


def _group_piece(
    anchor: int,
    freqs: list[FrequencyTuple],
    weights: np.ndarray,
    t: float,
    factor: object,
    nodes: int,
) -> ProfilePiece:
    """One piece for all tuples with sum(c) == anchor; exact zero when screened."""
    n = len(freqs[0].entries)
    screened = 2.0 * math.pi * t * (abs(anchor) - n) > UNDERFLOW_EXPONENT
    return ProfilePiece(
        anchor=anchor,
        lo=-float(n),
        hi=float(n),
        knots=_knots(n),
        amplitude=_GroupAmplitude(freqs, weights, nodes, factor),
        kind="duhamel",
        underflow=screened,
        label=f"E(R)[{anchor}]",
    )


def assemble_bumps(
    bumps: Sequence[tuple[int, float]],
    k: int,
    t: float,
    quad: QuadratureSpec | None = None,
    time_nodes: int | None = None,
    *,
    t_start: float = 0.0,
    exact_time: bool = True,
    prefactor_mode: str = "pi",
) -> SpectralProfile:
    """f_k for initial data sum_i w_i chi_(c_i) given as (c_i, w_i) pairs.

    Used for tiny data outside any sequence family, such as the physical-space
    cross check. Tuple indices are the bump positions in ``bumps``.

    Raises:
        ArgumentError: If a centre is not an integer with |c| > 1
    """
    if not isinstance(k, int) or k < 1:
        raise ArgumentError(f"order k must be a positive integer, got {k!r}")
    if any(not isinstance(c, int) or abs(c) <= 1 for c, _ in bumps):
        raise ArgumentError("bump centres must be integers with |c| > 1")
    if t_start < 0 or t < t_start:
        raise ArgumentError(f"Duhamel window [{t_start}, {t}] is invalid")
    quad = quad or QuadratureSpec()
    check_tensor_budget(k, quad)
    if t == t_start or not bumps:
        return SpectralProfile()
    factor = duhamel_factor(t, t_start, exact_time, time_nodes or config.time_nodes())
    options = sorted((i, c) for i, (c, _) in enumerate(bumps))
    groups: dict[int, list[FrequencyTuple]] = defaultdict(list)
    for pairs in itertools.product(options, repeat=2 * k + 1):
        item = FrequencyTuple.from_pairs(pairs)
        if not item.same_sign:
            groups[item.total].append(item)
    pieces = []
    for anchor, freqs in sorted(groups.items()):
        weights = np.array([math.prod(bumps[s][1] for s in f.indices) for f in freqs])
        pieces.append(
            _group_piece(anchor, freqs, weights, t, factor, quad.tensor_nodes)
        )
    prefactor = component_prefactor(k, prefactor_mode)
    return SpectralProfile(tuple(pieces)).scaled(prefactor)


def assemble_component(
    family: SequenceFamily,
    k: int,
    t: float,
    quad: QuadratureSpec | None = None,
    time_nodes: int | None = None,
    *,
    t_start: float = 0.0,
    exact_time: bool = True,
    prefactor_mode: str | None = None,
    max_tuples: int | None = None,
) -> IterateComponent:
    """Sum gamma-weighted, Duhamel-integrated R-terms into the buckets of f_k.

    Tuples with the same sum(c) and bucket share one profile piece. Pieces whose
    envelope exp(-2 pi t (|sum(c)| - (2k+1))) underflows are stored as exact
    zeros.

    Args:
        family: Sequence family
        k: Order, 1 <= k <= ell
        t: Evaluation time
        quad: Tensor order and node budget of the R-terms
        time_nodes: Gauss-Legendre order in time when ``exact_time`` is False
        t_start: Start of the Duhamel window (0 for the full iterate)
        exact_time: Integrate in time in closed form
        prefactor_mode: ``pi`` or ``no_pi``; defaults to ``LAB_PREFACTOR``
        max_tuples: Enumeration budget; defaults to ``LAB_MAX_TUPLES``

    Raises:
        ArgumentError: If k or the time window is out of range
        CapacityError: If the tuple or tensor-node budget is exceeded
    """
    if not isinstance(k, int) or not 1 <= k <= family.ell:
        raise ArgumentError(f"order k must lie in 1..{family.ell}, got {k!r}")
    if t_start < 0 or t < t_start:
        raise ArgumentError(f"Duhamel window [{t_start}, {t}] is invalid")
    quad = quad or QuadratureSpec()
    time_nodes = time_nodes or config.time_nodes()
    mode = prefactor_mode or config.prefactor_mode()
    budget = max_tuples or config.max_tuples()
    names = TOP_BUCKETS if k == family.ell else LOWER_BUCKETS
    prefactor = component_prefactor(k, mode)

    total = count_tuples(family, k, "all")
    if total > budget:
        raise CapacityError(
            f"f_{k} needs {total} tuples for N={family.N}, budget is {budget}"
        )
    check_tensor_budget(k, quad)

    counts = {name: 0 for name in names}
    counts.update(same_sign=0, screened=0, total=total)
    if t == t_start:
        parts = {name: SpectralProfile() for name in names}
        window = (t_start, t)
        return IterateComponent(k, family.ell, t, window, prefactor, parts, counts)

    groups: dict[tuple[str, int], list[FrequencyTuple]] = defaultdict(list)
    for item in enumerate_tuples(family, k, "all"):
        bucket = classify(item, k, family.ell, family.M)
        if bucket is None:
            counts["same_sign"] += 1
            continue
        counts[bucket] += 1
        groups[(bucket, item.total)].append(item)

    factor = duhamel_factor(t, t_start, exact_time, time_nodes)
    pieces: dict[str, list[ProfilePiece]] = {name: [] for name in names}
    for (bucket, anchor), freqs in groups.items():
        weights = np.array([_tuple_weight(family, f) for f in freqs])
        piece = _group_piece(anchor, freqs, weights, t, factor, quad.tensor_nodes)
        counts["screened"] += len(freqs) if piece.underflow else 0
        pieces[bucket].append(replace(piece, label=f"{bucket}[{anchor}]"))
    parts = {name: SpectralProfile(tuple(pieces[name])) for name in names}
    logger.debug(
        f"f_{k} at t={t}: "
        + ", ".join(f"{name}={counts[name]}" for name in names)
        + f", same_sign={counts['same_sign']}, screened={counts['screened']}"
    )
    return IterateComponent(k, family.ell, t, (t_start, t), prefactor, parts, counts)


def propagate_component(
    component: IterateComponent, t_extra: float
) -> IterateComponent:
    """Apply exp(-t_extra Lambda) to every bucket; the window is unchanged."""
    parts = {
        name: semigroup_apply(part, t_extra) for name, part in component.parts.items()
    }
    return replace(
        component,
        t=component.t + t_extra,
        parts=parts,
        notes=component.notes + (f"propagated by {t_extra}",),
    )


def combine_components(components: Sequence[IterateComponent]) -> SpectralProfile:
    """Sum of the full profiles of several components."""
    total = SpectralProfile()
    for component in components:
        total = total + component.profile()
    return total
