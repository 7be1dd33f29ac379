"""Logarithmic transforms of class B functions and the schemes built from their branches"""
from .models import ClassBModel, ContourModel, ExponentialModel, TractGrowth
from .transform import check_branch_bounds, log_transform_eval, tract_growth
from .growth import first_regular_point, growth_exceptional_set
from .branches import BranchFamily, BranchSquare, branch_squares
from .tract_schemes import (
    AffineNormalizer,
    BranchScheme,
    TractSchemes,
    TranslateScheme,
    build_tract_schemes,
    next_abscissa
)

__all__ = [
    "ClassBModel",
    "ContourModel",
    "ExponentialModel",
    "TractGrowth",
    "check_branch_bounds",
    "log_transform_eval",
    "tract_growth",
    "first_regular_point",
    "growth_exceptional_set",
    "BranchFamily",
    "BranchSquare",
    "branch_squares",
    "AffineNormalizer",
    "BranchScheme",
    "TractSchemes",
    "TranslateScheme",
    "build_tract_schemes",
    "next_abscissa"
]
