"""Koebe distortion bounds and branch contraction certificates"""
from .koebe import (
    Disk,
    koebe_ratio_bounds,
    koebe_derivative_bounds,
    koebe_distortion_constant,
    koebe_rotation_bound,
    koebe_quarter,
    verify_quarter_containment,
    certify_branch_contraction,
    chord_ratio_check
)

__all__ = [
    "Disk",
    "koebe_ratio_bounds",
    "koebe_derivative_bounds",
    "koebe_distortion_constant",
    "koebe_rotation_bound",
    "koebe_quarter",
    "verify_quarter_containment",
    "certify_branch_contraction",
    "chord_ratio_check"
]
