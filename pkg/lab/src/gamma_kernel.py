"""The (2k+1)-fold interaction kernel Gamma_{2k+1}.

Gamma_{2k+1}(A) = i * int prod_i m_alpha(A_i) d alpha with
m_alpha(A) = (1 - exp(-2 pi i alpha A)) / alpha. The closed form is the
alternating sum over all nonempty subset sums s_S of the arguments,

    (-1)^(k+1) (2 pi)^(2k) pi / (2k)! * sum_S (-1)^(|S|-1) s_S^(2k-1) |s_S|,

and the oracle integrates the sine-product form

    2 * 2^(2k+1) (-1)^(k+1) int_0^inf cos(pi a sigma) prod_i sin(pi a A_i) / a^(2k+1)

which is regular at a = 0.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ArgumentError, ToleranceError
from .schemas import QuadratureSpec

logger = logging.getLogger(__name__)

PROPERTIES = ("ii", "iii", "iv", "v", "vi", "vii")
_PANEL_NODES = 16
# relative rounding allowance per unit of absolute integrand mass
_ROUNDING = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class GammaKernel:
    """Order k of the kernel plus the oracle's quadrature budget."""

    k: int
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ArgumentError(
                f"kernel order must be a positive integer, got {self.k}"
            )

    @property
    def arity(self) -> int:
        """Number of arguments, 2k+1."""
        return 2 * self.k + 1

    @property
    def prefactor(self) -> float:
        """(-1)^(k+1) (2 pi)^(2k) pi / (2k)!."""
        return gamma_prefactor(self.k)


@dataclass(frozen=True)
class PropertyResult:
    """Verdict of one property check.

    ``applicable`` is False when the hypotheses of the property do not hold
    for the given tuple; such results always pass.
    """

    which: str
    passed: bool
    residual: float
    applicable: bool = True
    detail: dict = field(default_factory=dict)


def gamma_prefactor(k: int) -> float:
    """Scalar in front of the alternating subset sum."""
    sign = 1.0 if (k + 1) % 2 == 0 else -1.0
    return sign * (2 * math.pi) ** (2 * k) * math.pi / math.factorial(2 * k)


@lru_cache(maxsize=None)
def subset_masks(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All nonempty subsets of n items as a boolean mask matrix.

    Returns:
        (masks, signs): masks has shape (2^n - 1, n); signs holds
        (-1)^(|S|-1) for each row
    """
    rows = list(itertools.product((False, True), repeat=n))[1:]
    masks = np.array(rows, dtype=bool)
    signs = np.where(masks.sum(axis=1) % 2 == 1, 1.0, -1.0)
    masks.setflags(write=False)
    signs.setflags(write=False)
    return masks, signs


def _validated(kernel: GammaKernel, A: Sequence[float]) -> list[float]:
    values = [float(a) for a in A]
    if len(values) != kernel.arity:
        raise ArgumentError(
            f"Gamma_{kernel.arity} needs {kernel.arity} arguments, got {len(values)}"
        )
    if not all(math.isfinite(a) for a in values):
        raise ArgumentError("Gamma arguments must be finite")
    return values


def _signed_power(s: float, k: int) -> float:
    return math.copysign(abs(s) ** (2 * k), s)


def _subset_terms(k: int, A: Sequence[float]) -> list[float]:
    masks, signs = subset_masks(len(A))
    terms = []
    for mask, sign in zip(masks, signs):
        s = math.fsum(a for a, chosen in zip(A, mask) if chosen)
        terms.append(sign * _signed_power(s, k))
    return terms


def same_sign(values: Sequence[float]) -> bool:
    """True when every entry is strictly positive or every entry strictly negative."""
    return all(v > 0 for v in values) or all(v < 0 for v in values)


def gamma_scale(kernel: GammaKernel, A: Sequence[float]) -> float:
    """Magnitude |prefactor| * sum_S |s_S|^(2k) used to judge cancellation."""
    values = _validated(kernel, A)
    return abs(kernel.prefactor) * math.fsum(
        abs(t) for t in _subset_terms(kernel.k, values)
    )


def gamma_closed_form(kernel: GammaKernel, A: Sequence[float]) -> float:
    """Evaluate Gamma_{2k+1}(A) from the explicit subset formula.

    Subset sums and the alternating sum both use ``math.fsum``, which rounds the
    exact sum once; the result is therefore identical for every permutation
    of ``A``.

    Args:
        kernel: Kernel of order k
        A: Tuple of 2k+1 real arguments

    Returns:
        The real value of the kernel; exactly 0.0 for same-sign tuples

    Raises:
        ArgumentError: If ``len(A) != 2k+1``

    Examples:
        - k=1, A=(-1, -1, 2) -> 8 pi^3
        - k=1, A=(1, 1, 1) -> 0.0
    """
    values = _validated(kernel, A)
    if same_sign(values):
        return 0.0
    return kernel.prefactor * math.fsum(_subset_terms(kernel.k, values))


def closed_form_batch(
    k: int, centers: Sequence[int], offsets: np.ndarray
) -> np.ndarray:
    """Gamma_{2k+1}(c + v) for many offset rows v around integer centres c.

    Subset sums are formed as float(C_S) + sum_S v with C_S computed exactly in
    integers, so large centres lose no precision in the offsets.

    Args:
        k: Kernel order
        centers: 2k+1 integer centres
        offsets: Array of shape (P, 2k+1)

    Returns:
        Array of shape (P,)
    """
    n = 2 * k + 1
    if len(centers) != n or offsets.shape[-1] != n:
        raise ArgumentError(f"Gamma_{n} batch needs rows of length {n}")
    masks, signs = subset_masks(n)
    center_sums = np.array(
        [float(sum(c for c, chosen in zip(centers, mask) if chosen)) for mask in masks]
    )
    sums = center_sums + offsets @ masks.T.astype(float)
    terms = np.sign(sums) * np.abs(sums) ** (2 * k)
    return gamma_prefactor(k) * (terms @ signs)


def closed_form_grid(
    k: int, centers: Sequence[Sequence[int]], offsets: np.ndarray
) -> np.ndarray:
    """Gamma_{2k+1}(c + v) for every centre row c and every offset row v.

    Returns:
        Array of shape (len(centers), len(offsets))
    """
    n = 2 * k + 1
    if any(len(row) != n for row in centers) or offsets.shape[-1] != n:
        raise ArgumentError(f"Gamma_{n} grid needs rows of length {n}")
    masks, signs = subset_masks(n)
    center_sums = np.array(
        [
            [float(sum(c for c, chosen in zip(row, mask) if chosen)) for mask in masks]
            for row in centers
        ]
    )
    sums = center_sums[:, None, :] + (offsets @ masks.T.astype(float))[None, :, :]
    terms = np.sign(sums) * np.abs(sums) ** (2 * k)
    return gamma_prefactor(k) * (terms @ signs)


def _max_frequency(A: Sequence[float]) -> float:
    """Largest |s_S| over subsets, in cycles per unit alpha."""
    total = math.fsum(A)
    return 0.5 * (abs(total) + math.fsum(abs(a) for a in A))


def oracle_tail_bound(kernel: GammaKernel, A: Sequence[float], cutoff: float) -> float:
    """Bound on the Gamma-scale contribution of alpha > cutoff.

    Expanding the sine product into exponentials leaves terms
    exp(+-2 pi i alpha s_S) / alpha^(2k+1) of size 2^-(2k+1); the zero-frequency
    ones are purely imaginary and drop out of the real part.
    """
    k = kernel.k
    masks, _ = subset_masks(len(A))
    bound = 0.0
    for mask in masks:
        s = abs(math.fsum(a for a, chosen in zip(A, mask) if chosen))
        if s == 0.0:
            continue
        bound += min(
            cutoff ** (-2 * k) / (2 * k),
            1.0 / (math.pi * s * cutoff ** (2 * k + 1)),
        )
    return 2.0 * bound


def _sine_product_integrand(A: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    sigma = A.sum()
    values = np.cos(np.pi * alpha * sigma)
    for a in A:
        # sin(pi alpha a) / alpha = pi a sinc(alpha a)
        values = values * (np.pi * a * np.sinc(alpha * a))
    return values


def _panel_rule(lo: float, hi: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(_PANEL_NODES)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def gamma_oracle_estimate(
    kernel: GammaKernel, A: Sequence[float]
) -> tuple[float, float]:
    """Integrate the defining alpha-integral of Gamma_{2k+1} numerically.

    The half-line [0, L] is covered by composite 16-point Gauss-Legendre
    panels resolving the fastest oscillation; L doubles until the analytic tail
    bound falls below ``rtol`` times the kernel's magnitude.

    Returns:
        (estimate, error_bound): the bound adds the tail beyond the final L to
        the rounding of the panel sums

    Raises:
        ArgumentError: On dimension mismatch
        ToleranceError: If ``cutoff`` or ``max_nodes`` is reached first
    """
    values = _validated(kernel, A)
    spec = kernel.quadrature
    k = kernel.k
    arr = np.array(values)
    scale_factor = 2.0 * 2.0 ** (2 * k + 1) * (-1.0) ** (k + 1)

    cycles = _max_frequency(values)
    per_unit = max(spec.nodes_per_unit, _PANEL_NODES * math.ceil(cycles))
    floor_scale = 1e-3 * (2 * math.pi) ** (2 * k + 1)

    pieces: list[float] = []
    magnitude = 0.0
    lo = 0.0
    if spec.pv_exclusion > 0:
        limit = math.pi ** (2 * k + 1) * math.prod(values)
        pieces.append(spec.pv_exclusion * limit)
        magnitude += abs(pieces[-1])
        lo = spec.pv_exclusion
    hi = max(lo, min(spec.cutoff, 16.0))
    used = 0
    while True:
        if hi > lo:
            panels = max(1, math.ceil((hi - lo) * per_unit / _PANEL_NODES))
            used += panels * _PANEL_NODES
            if used > spec.max_nodes:
                estimate = scale_factor * math.fsum(pieces)
                raise ToleranceError(
                    "Gamma oracle exceeded its node budget", estimate, math.inf
                )
            nodes, weights = _panel_rule(lo, hi, panels)
            integrand = _sine_product_integrand(arr, nodes)
            pieces.append(float(np.dot(weights, integrand)))
            magnitude += float(np.dot(weights, np.abs(integrand)))
        estimate = scale_factor * math.fsum(pieces)
        tail = oracle_tail_bound(kernel, values, hi)
        rounding = _ROUNDING * abs(scale_factor) * magnitude
        if tail <= spec.rtol * max(abs(estimate), floor_scale):
            logger.debug(f"Gamma oracle converged at cutoff {hi} with {used} nodes")
            return estimate, tail + rounding
        if hi >= spec.cutoff:
            raise ToleranceError(
                "Gamma oracle cutoff too small", estimate, tail + rounding
            )
        lo, hi = hi, min(2.0 * hi, spec.cutoff)


def gamma_oracle(kernel: GammaKernel, A: Sequence[float]) -> float:
    """Numerical Gamma_{2k+1}(A); see ``gamma_oracle_estimate``."""
    return gamma_oracle_estimate(kernel, A)[0]


def _bound_v(k: int, values: Sequence[float]) -> float:
    return (2 * math.pi) ** (2 * k + 1) * math.prod(abs(a) for a in values[: 2 * k])


def gamma_property_check(
    kernel: GammaKernel,
    A: Sequence[float],
    which: str,
    *,
    c: float = -3.0,
    rng: np.random.Generator | None = None,
    samples: int = 200,
) -> PropertyResult:
    """Check one part of the kernel lemma on a tuple.

    Args:
        kernel: Kernel of order k
        A: Tuple of 2k+1 arguments
        which: One of ``ii`` (scaling by ``c``), ``iii`` (same-sign vanishing),
            ``iv`` (permutation symmetry), ``v`` and ``vi`` (size bounds),
            ``vii`` (perturbation; reports the measured constant)
        c: Scaling factor for ``ii``
        rng: Random source for ``iv`` (k >= 2) and ``vii``
        samples: Number of random permutations or perturbations

    Returns:
        PropertyResult with the residual of the check

    Raises:
        ArgumentError: On dimension mismatch or unknown property id
    """
    values = _validated(kernel, A)
    if which not in PROPERTIES:
        raise ArgumentError(f"unknown property {which!r}, expected one of {PROPERTIES}")
    k = kernel.k
    rng = rng if rng is not None else np.random.default_rng(0)
    gamma = gamma_closed_form(kernel, values)

    if which == "ii":
        scaled = [c * a for a in values]
        lhs = gamma_closed_form(kernel, scaled)
        rhs = c ** (2 * k) * math.copysign(1.0, c) * gamma
        residual = abs(lhs - rhs)
        tol = 1e-12 * gamma_scale(kernel, scaled)
        return PropertyResult(which, residual <= tol, residual, detail={"c": c})

    if which == "iii":
        if not same_sign(values):
            return PropertyResult(which, True, math.nan, applicable=False)
        # the unshortcut sum must cancel too
        raw = kernel.prefactor * math.fsum(_subset_terms(k, values))
        residual = abs(raw)
        largest = max(abs(a) for a in values)
        tol = 1e-8 * (2 * math.pi) ** (2 * k + 1) * largest ** (2 * k)
        return PropertyResult(which, gamma == 0.0 and residual <= tol, residual)

    if which == "iv":
        if k == 1:
            perms = list(itertools.permutations(values))
        else:
            perms = [
                [values[i] for i in rng.permutation(len(values))]
                for _ in range(samples)
            ]
        residual = max(abs(gamma_closed_form(kernel, p) - gamma) for p in perms)
        tol = 1e-12 * gamma_scale(kernel, values)
        detail = {"count": len(perms)}
        return PropertyResult(which, residual <= tol, residual, detail=detail)

    if which == "v":
        bound = _bound_v(k, values)
        residual = abs(gamma) - bound
        return PropertyResult(
            which,
            residual <= 1e-12 * max(bound, 1.0),
            residual,
            detail={"bound": bound},
        )

    if which == "vi":
        product = math.prod(abs(a) for a in values)
        first = (2 * math.pi) ** (2 * k + 1) * product ** (2 * k / (2 * k + 1))
        second = (2 * math.pi) ** (2 * k + 1) * min(
            math.prod(abs(a) for i, a in enumerate(values) if i != j)
            for j in range(len(values))
        )
        residual = abs(gamma) - min(first, second)
        return PropertyResult(
            which,
            residual <= 1e-12 * max(first, 1.0),
            residual,
            detail={"first_bound": first, "second_bound": second},
        )

    # vii: perturbation
    if any(abs(a) <= 2 for a in values):
        return PropertyResult(which, True, math.nan, applicable=False)
    arr = np.array(values)
    perturbed = arr + rng.uniform(-1.0, 1.0, size=(samples, len(values)))
    denom = math.fsum(abs(a) ** (2 * k - 1) for a in values)
    worst = max(abs(gamma_closed_form(kernel, row) - gamma) for row in perturbed)
    constant = worst / denom
    return PropertyResult(
        which, math.isfinite(constant), worst, detail={"measured_C": constant}
    )


def gamma_special_value_check(ell: int, k_val: float, M: float) -> dict:
    """Compare Gamma_{2 ell+1}(-k, ..., -k, 2 ell k + M) with its leading term.

    The closed form splits into the leading term (-1)^(ell+1) (2 pi)^(2 ell+1)
    k^(2 ell) plus Gamma_{2 ell+1}(k, ..., k, M), which vanishes for positive
    arguments; the residual is therefore rounding only.

    Args:
        ell: Truncation order
        k_val: Frequency magnitude, must exceed ``M``
        M: Positive offset

    Returns:
        Mapping with ``residual`` r = |Gamma - leading| / k^(2 ell - 1), the
        ``bound`` (2 pi)^(2 ell+1) M, the kernel ``value``, the ``leading`` term,
        the ``remainder`` Gamma(k, ..., k, M) and ``passed``
    """
    if not k_val > M > 0:
        raise ArgumentError("special value needs k_val > M > 0")
    kernel = GammaKernel(ell)
    args = [-k_val] * (2 * ell) + [2 * ell * k_val + M]
    value = gamma_closed_form(kernel, args)
    leading = (-1.0) ** (ell + 1) * (2 * math.pi) ** (2 * ell + 1) * k_val ** (2 * ell)
    remainder = gamma_closed_form(kernel, [k_val] * (2 * ell) + [M])
    residual = abs(value - leading) / k_val ** (2 * ell - 1)
    bound = (2 * math.pi) ** (2 * ell + 1) * M
    return {
        "ell": ell,
        "k_val": k_val,
        "M": M,
        "value": value,
        "leading": leading,
        "remainder": remainder,
        "residual": residual,
        "bound": bound,
        "passed": residual <= bound and math.copysign(1.0, value) == math.copysign(
            1.0, leading
        ),
    }


def random_tuple(
    rng: np.random.Generator,
    n: int,
    low: float = 0.1,
    high: float = 50.0,
    mixed: bool = True,
) -> list[float]:
    """n entries with |A_i| uniform in [low, high].

    Signs are mixed unless ``mixed`` is False, which gives a same-sign tuple.
    """
    magnitudes = rng.uniform(low, high, size=n)
    if not mixed:
        return list(magnitudes * (1.0 if rng.random() < 0.5 else -1.0))
    signs = rng.choice([-1.0, 1.0], size=n)
    if len(set(signs)) == 1:
        signs[rng.integers(n)] *= -1.0
    return list(magnitudes * signs)


def oracle_discrepancy(
    kernel: GammaKernel, A: Sequence[float], rtol: float = 1e-5
) -> tuple[float, float]:
    """Distance between closed form and oracle, and the distance allowed.

    The allowance is ``rtol`` relative to the closed form plus the oracle's own
    error bound plus the rounding of the closed form's alternating sum, so a
    small kernel value is still held to the accuracy the two methods reach.
    An oracle that stops at its cutoff is judged with the bound it reported.
    """
    closed = gamma_closed_form(kernel, A)
    try:
        numeric, bound = gamma_oracle_estimate(kernel, A)
    except ToleranceError as e:
        logger.warning(f"Gamma oracle gave up on {A}: {e}")
        numeric, bound = e.estimate, e.error_bound
    allowed = rtol * abs(closed) + bound + _ROUNDING * gamma_scale(kernel, A)
    return abs(closed - numeric), allowed


def _oracle_agreement(
    kernel: GammaKernel, rng: np.random.Generator, samples: int
) -> dict:
    worst, failures = 0.0, 0
    for _ in range(samples):
        error, allowed = oracle_discrepancy(kernel, random_tuple(rng, kernel.arity))
        if allowed < math.inf:
            worst = max(worst, error / allowed)
        failures += not error <= allowed < math.inf
    return {"samples": samples, "failures": failures, "max_error_ratio": worst}


def gamma_check_suite(
    rng: np.random.Generator,
    samples: int = 200,
    orders: Sequence[int] = (1, 2),
    oracle_samples: int = 20,
) -> dict:
    """Randomized sweep of the kernel lemma plus the special-value sweep.

    For each order: ``samples`` mixed-sign tuples for ii, iv, v and vi,
    ``samples`` same-sign tuples for iii, ``samples`` base tuples with
    |A_i| in (2, 50] for vii, and ``oracle_samples`` closed-form versus
    quadrature comparisons.

    Returns:
        JSON-ready summary with a top-level ``passed`` flag
    """
    summary: dict = {"orders": {}, "special_values": []}
    passed = True
    for k in orders:
        kernel = GammaKernel(k)
        per_property = {}
        for which in PROPERTIES:
            failures, worst, constant = 0, 0.0, 0.0
            for _ in range(samples):
                if which == "iii":
                    A = random_tuple(rng, kernel.arity, mixed=False)
                elif which == "vii":
                    A = random_tuple(rng, kernel.arity, low=2.0 + 1e-9)
                else:
                    A = random_tuple(rng, kernel.arity)
                result = gamma_property_check(kernel, A, which, rng=rng)
                failures += not result.passed
                if result.applicable and math.isfinite(result.residual):
                    worst = max(worst, result.residual)
                constant = max(constant, result.detail.get("measured_C", 0.0))
            entry = {"samples": samples, "failures": failures, "max_residual": worst}
            if which == "vii":
                entry["measured_C"] = constant
            per_property[which] = entry
            passed = passed and failures == 0
        oracle = _oracle_agreement(kernel, rng, oracle_samples)
        passed = passed and oracle["failures"] == 0
        summary["orders"][str(k)] = {"properties": per_property, "oracle": oracle}

    for ell in (1, 2):
        for M in (2 * ell + 3, 2 * ell + 5):
            for k_val in (1e2, 1e3, 1e4):
                check = gamma_special_value_check(ell, k_val, M)
                summary["special_values"].append(check)
                passed = passed and check["passed"]
    summary["passed"] = passed
    logger.info(f"Gamma check suite over orders {list(orders)}: passed={passed}")
    return summary
