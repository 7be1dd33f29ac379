"""Iterated function schemes, limit sets and stage schedules"""
from .dimension import similarity_dimension, scheme_exponent
from .limit_set import (
    LimitSample,
    limit_set_points,
    cylinder_measure,
    cylinder_masses,
    ball_masses,
    mass_distribution_check,
    ratio_trend
)
from .schedule import (
    PowerCheck,
    schedule_indices,
    schedule_margin,
    interleave_schemes,
    power_scheme_check,
    similarity_scheme
)
from .schemes import (
    SQUARE_CENTER,
    SQUARE_DIAMETER,
    BaseScheme,
    ContractionMap,
    Scheme,
    ComposedScheme,
    SchemeSequence,
    StageStats,
    PrefixStats,
    prefix_stats,
    square_grid,
    square_boundary
)

__all__ = [
    "similarity_dimension",
    "scheme_exponent",
    "LimitSample",
    "limit_set_points",
    "cylinder_measure",
    "cylinder_masses",
    "ball_masses",
    "mass_distribution_check",
    "ratio_trend",
    "PowerCheck",
    "schedule_indices",
    "schedule_margin",
    "interleave_schemes",
    "power_scheme_check",
    "similarity_scheme",
    "SQUARE_CENTER",
    "SQUARE_DIAMETER",
    "BaseScheme",
    "ContractionMap",
    "Scheme",
    "ComposedScheme",
    "SchemeSequence",
    "StageStats",
    "PrefixStats",
    "prefix_stats",
    "square_grid",
    "square_boundary"
]
