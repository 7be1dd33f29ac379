"""Similarity exponents: the s with sum b_i**s = 1"""
import logging
import math
from typing import Sequence

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

import config
from errors import NumericFailure, PreconditionError

logger = logging.getLogger(__name__)


def _solve_decreasing(log_sum, label: str) -> float:
    """Root of a strictly decreasing map s -> ln sum b**s on [0, inf)"""
    lo, hi = 0.0, config.DIMENSION_BRACKET
    if log_sum(lo) <= 0:
        return 0.0
    while log_sum(hi) > 0:
        logger.warning(f"{label}: exponent above {hi}, widening bracket")
        lo, hi = hi, 2 * hi
        if hi > 1e6:
            raise NumericFailure(f"{label}: no exponent below {hi}")
    return optimize.bisect(log_sum, lo, hi, xtol=config.DIMENSION_TOL * 1e-2, maxiter=400)


def similarity_dimension(ratios: Sequence[float]) -> float:
    """s >= 0 with sum(b**s) = 1"""
    b = np.asarray(list(ratios), dtype=float)
    if b.size == 0:
        raise PreconditionError("ratio list is empty")
    if np.any(b <= 0) or np.any(b >= 1):
        raise PreconditionError("ratios must lie in (0, 1)")
    log_b = np.log(b)
    return _solve_decreasing(lambda s: float(logsumexp(s * log_b)), "similarity_dimension")


def scheme_exponent(scheme) -> float:
    """Exponent of any scheme exposing power_sum_log"""
    value = _solve_decreasing(scheme.power_sum_log, f"scheme {scheme.name}")
    if math.isnan(value):
        raise NumericFailure("exponent is NaN")
    return value
