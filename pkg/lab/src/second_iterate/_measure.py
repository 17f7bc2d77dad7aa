"""Norms of assembled components and the comparison sums they are judged by."""

import logging
import math

from ..besov_norm import besov_norm
from ..schemas import ComponentSummary, NormParams, QuadratureSpec
from ..sequences import SequenceFamily
from ._component import IterateComponent

logger = logging.getLogger(__name__)


def _sorted_fsum(values) -> float:
    return math.fsum(sorted(values, key=abs, reverse=True))


def resonant_sum(family: SequenceFamily) -> float:
    """sum_j gamma_j^(2 ell+1) k_j^(2 ell-1)."""
    ell = family.ell
    return _sorted_fsum(
        family.gamma(j) ** (2 * ell + 1) * float(family.k(j)) ** (2 * ell - 1)
        for j in family.indices
    )


def linear_sum(family: SequenceFamily, k: int) -> float:
    """sum_j gamma_j k_j^((2k-1)/(2k+1))."""
    exponent = (2 * k - 1) / (2 * k + 1)
    return _sorted_fsum(
        family.gamma(j) * float(family.k(j)) ** exponent for j in family.indices
    )


def high_frequency_sum(family: SequenceFamily, k: int) -> float:
    """(sum_j gamma_j^((2k+1) q) k_j^((2k-2+m) q))^(1/q)."""
    q, m = family.q, family.m
    total = _sorted_fsum(
        family.gamma(j) ** ((2 * k + 1) * q)
        * float(family.k(j)) ** ((2 * k - 2 + m) * q)
        for j in family.indices
    )
    return total ** (1.0 / q)


def time_window_ok(family: SequenceFamily, t: float) -> bool:
    """t M <= 1 and t k_N > 1."""
    return t * family.M <= 1.0 and t * family.k_N > 1.0


def measure_component_norms(
    component: IterateComponent,
    params: NormParams,
    family: SequenceFamily | None = None,
    quad: QuadratureSpec | None = None,
) -> ComponentSummary:
    """Measure every bucket of a component and the full f_k.

    Args:
        component: Assembled component
        params: Norm indices, usually s = m with the family's p and q
        family: When given, the comparison sums and the time-window flag are
            filled in
        quad: Optional quadrature budget for the norms

    Returns:
        ComponentSummary; ``f_lower`` is |prefactor| (J - HF_1 - HF_2) for
        k = ell and ``triangle_ok`` records f_norm >= f_lower
    """
    k = component.k
    parts = component.parts
    norms = {name: besov_norm(part, params, quad) for name, part in parts.items()}
    summary = ComponentSummary(
        k=k,
        t=component.t,
        J_norm=norms["J"],
        HF_norm=besov_norm(component.off_diagonal, params, quad),
        HF1_norm=norms.get("HF1", math.nan),
        HF2_norm=norms.get("HF2", math.nan),
        f_norm=besov_norm(component.profile(), params, quad),
        prefactor=component.prefactor,
        counts=dict(component.counts),
        notes=list(component.notes),
    )
    if k == component.ell:
        lower = abs(component.prefactor) * (norms["J"] - norms["HF1"] - norms["HF2"])
        summary.f_lower = lower
        summary.triangle_ok = summary.f_norm >= lower - 1e-9 * abs(lower)
    if family is not None:
        summary.sum_J = resonant_sum(family)
        summary.sum_L = linear_sum(family, k)
        summary.sum_S4 = high_frequency_sum(family, k)
        if k == family.ell:
            summary.J_ratio = summary.J_norm / summary.sum_J
        if component.t > 0 and not time_window_ok(family, component.t):
            summary.time_window_ok = False
            note = (
                f"t={component.t} outside the window t M <= 1 < t k_N "
                f"(M={family.M}, k_N={family.k_N})"
            )
            summary.notes.append(note)
            logger.warning(note)
    return summary
