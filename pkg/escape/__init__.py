"""Orbits, escape-rate classification and class rasters"""
from .rates import RateSequence, check_normalized, normalize_rate_sequence, zeta_tail
from .orbits import (
    OrbitRecord,
    derivative_cauchy_check,
    iterate_orbit,
    iterate_real_log,
    iterated_max_modulus,
    max_modulus_tower
)
from .classify import (
    CODES,
    EscapeClass,
    EscapeKind,
    TrapCertificate,
    classify_orbit,
    fast_lag,
    fixed_point_estimate,
    trap_certificate
)
from .render import pixel_centers, render_partition

__all__ = [
    "RateSequence",
    "check_normalized",
    "normalize_rate_sequence",
    "zeta_tail",
    "OrbitRecord",
    "derivative_cauchy_check",
    "iterate_orbit",
    "iterate_real_log",
    "iterated_max_modulus",
    "max_modulus_tower",
    "CODES",
    "EscapeClass",
    "EscapeKind",
    "TrapCertificate",
    "classify_orbit",
    "fast_lag",
    "fixed_point_estimate",
    "trap_certificate",
    "pixel_centers",
    "render_partition"
]
