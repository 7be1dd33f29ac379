"""Strip profiles, Ahlfors distortion bounds and contour-integral functions"""
from .profile import FunctionProfile, RecursiveProfile, StripProfile, build_phi, check_recursion
from .gauge_profile import GaugeProfile, build_phi_for_gauge, tau, tau_is_increasing
from .ahlfors import (
    AhlforsBound,
    GrowthCapReport,
    ahlfors_lower,
    ahlfors_upper,
    growth_cap_check,
    integrate_reciprocal,
    tract_growth_bound,
    upper_abscissa
)
from .contour import ApproxEntireFunction, approx_strip_map, contour_function_build

__all__ = [
    "FunctionProfile",
    "RecursiveProfile",
    "StripProfile",
    "build_phi",
    "check_recursion",
    "GaugeProfile",
    "build_phi_for_gauge",
    "tau",
    "tau_is_increasing",
    "AhlforsBound",
    "GrowthCapReport",
    "ahlfors_lower",
    "ahlfors_upper",
    "growth_cap_check",
    "integrate_reciprocal",
    "tract_growth_bound",
    "upper_abscissa",
    "ApproxEntireFunction",
    "approx_strip_map",
    "contour_function_build"
]
