"""Grid cells where a growth function outpaces its own power, g' > g^(1+delta)"""
import logging
from typing import Callable, Optional, Tuple

import numpy as np

from errors import PreconditionError
from storage.models import ExceptionalSet

logger = logging.getLogger(__name__)


def growth_exceptional_set(
    g: Callable[[np.ndarray], np.ndarray],
    delta: float,
    interval: Tuple[float, float],
    grid_points: int = 4096,
    g_prime: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    log_form: bool = False,
) -> ExceptionalSet:
    """
    Union of grid cells of `interval` whose midpoint has g' > g^(1 + delta).

    Where g >= 1 the set has measure at most 1/delta. With log_form the
    callables return ln g and ln g', so fast growth does not overflow.
    """
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    a, b = interval
    if not b > a or grid_points < 1:
        raise PreconditionError("need a nonempty interval and at least one cell")

    edges = np.linspace(a, b, grid_points + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])

    if g_prime is None:
        step = 1e-6 * max(1.0, abs(a), abs(b))
        if log_form:
            # (ln g)' = g'/g
            slope = (g(mid + step) - g(mid - step)) / (2 * step)
            with np.errstate(divide="ignore", invalid="ignore"):
                log_gp = g(mid) + np.log(slope)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                log_gp = np.log((g(mid + step) - g(mid - step)) / (2 * step))
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            log_gp = g_prime(mid) if log_form else np.log(g_prime(mid))

    with np.errstate(divide="ignore", invalid="ignore"):
        log_g = g(mid) if log_form else np.log(g(mid))
        exceptional = np.nan_to_num(log_gp, nan=-np.inf) > (1 + delta) * log_g

    intervals = []
    start = None
    for i, flag in enumerate(exceptional):
        if flag and start is None:
            start = edges[i]
        elif not flag and start is not None:
            intervals.append((float(start), float(edges[i])))
            start = None
    if start is not None:
        intervals.append((float(start), float(edges[-1])))

    measure = float(sum(hi - lo for lo, hi in intervals))
    bound = 1.0 / delta
    bound_checked = bool(np.all(log_g[exceptional] >= 0))
    ok = measure <= bound if bound_checked else True
    if bound_checked and not ok:
        logger.warning(f"exceptional set has measure {measure:.6g} > 1/delta = {bound:.6g}")
    logger.debug(f"exceptional set: {len(intervals)} intervals, measure {measure:.6g}")
    return ExceptionalSet(
        intervals=intervals, measure=measure, bound=bound, bound_checked=bound_checked, ok=ok
    )


def first_regular_point(exceptional: ExceptionalSet, interval: Tuple[float, float], samples: int = 64) -> float:
    """Least sample of the interval outside the exceptional set"""
    for x in np.linspace(interval[0], interval[1], samples):
        if not exceptional.contains(float(x)):
            return float(x)
    raise PreconditionError(f"interval {interval} lies inside the exceptional set")