"""Gauge functions for Hausdorff measures"""
from .gauge_fn import GaugeFn, GaugeFactor

__all__ = [
    "GaugeFn",
    "GaugeFactor"
]
