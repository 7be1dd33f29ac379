"""Covers: pre-measure estimates, Besicovitch selection and zero-measure certificates"""
from .premeasure import (
    BoxDimension,
    CoverSet,
    as_points,
    box_dimension,
    build_cover,
    lipschitz_image_check,
    premeasure_profile,
    premeasure_upper
)
from .besicovitch import BesicovitchCover, besicovitch_cover, coverage_fraction, grid_multiplicity
from .certificate import assembled_mass, zero_measure_certificate
from .recipe import OrbitCoverRecipe, find_qualifying_indices, orbit_cover_recipe, qualifying_index

__all__ = [
    "BoxDimension",
    "CoverSet",
    "as_points",
    "box_dimension",
    "build_cover",
    "lipschitz_image_check",
    "premeasure_profile",
    "premeasure_upper",
    "BesicovitchCover",
    "besicovitch_cover",
    "coverage_fraction",
    "grid_multiplicity",
    "assembled_mass",
    "zero_measure_certificate",
    "OrbitCoverRecipe",
    "find_qualifying_indices",
    "orbit_cover_recipe",
    "qualifying_index"
]
