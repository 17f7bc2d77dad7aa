"""Sequence families, initial data and interaction tuples."""

from ._family import (
    MAGNITUDE_CAP,
    ConditionResult,
    SequenceFamily,
    build_initial_data,
    check_parameters,
    condition_b_sides,
    family_hash,
    generate_family,
    last_index,
    regularity,
    validate_family,
)
from ._lemmas import (
    BoundCheck,
    LemmaRecord,
    is_exceptional,
    is_resonant_configuration,
    sum_lemma_check,
    triangle_check,
)
from ._tuples import MODES, FrequencyTuple, count_tuples, enumerate_tuples

__all__ = [
    "MAGNITUDE_CAP",
    "MODES",
    "BoundCheck",
    "ConditionResult",
    "FrequencyTuple",
    "LemmaRecord",
    "SequenceFamily",
    "build_initial_data",
    "check_parameters",
    "condition_b_sides",
    "count_tuples",
    "enumerate_tuples",
    "family_hash",
    "generate_family",
    "is_exceptional",
    "is_resonant_configuration",
    "last_index",
    "regularity",
    "sum_lemma_check",
    "triangle_check",
    "validate_family",
]
