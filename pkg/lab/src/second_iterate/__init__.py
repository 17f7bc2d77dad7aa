"""Second Picard iterate: R-terms, components f_k and their norms."""

from ._component import (
    LOWER_BUCKETS,
    TOP_BUCKETS,
    IterateComponent,
    assemble_bumps,
    assemble_component,
    classify,
    combine_components,
    component_prefactor,
    propagate_component,
)
from ._measure import (
    high_frequency_sum,
    linear_sum,
    measure_component_norms,
    resonant_sum,
    time_window_ok,
)
from ._r_term import (
    RTerm,
    assemble_r_term,
    duhamel_factor,
    instant_factor,
    slice_integrals,
    slice_rule,
)

__all__ = [
    "LOWER_BUCKETS",
    "TOP_BUCKETS",
    "IterateComponent",
    "RTerm",
    "assemble_bumps",
    "assemble_component",
    "assemble_r_term",
    "classify",
    "combine_components",
    "component_prefactor",
    "duhamel_factor",
    "high_frequency_sum",
    "instant_factor",
    "linear_sum",
    "measure_component_norms",
    "propagate_component",
    "resonant_sum",
    "slice_integrals",
    "slice_rule",
    "time_window_ok",
]
