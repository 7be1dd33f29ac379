"""
Zero-measure certificates: at every sampled x and every eps of a schedule a
locator returns delta(x) <= eps and balls B_j covering K inside B(x, delta(x))
with sum h(diam B_j) <= eps delta(x)^d.
"""
import logging
import math
from typing import Callable, Iterable, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from errors import NumericFailure, PreconditionError
from storage.models import CertificateReport
from .besicovitch import besicovitch_cover, coverage_fraction
from .premeasure import as_points

logger = logging.getLogger(__name__)

# locator(x, eps) -> (delta, ball centers, ball diameters)
Locator = Callable[[np.ndarray, float], Tuple[float, Sequence, Sequence[float]]]


def zero_measure_certificate(points, gauge: Callable, locator: Locator, eps_schedule: Iterable[float],
                             dim: int = 2) -> CertificateReport:
    """
    Check the local cover hypothesis at every sample point and eps.

    The report carries the largest ratio sum h / (eps delta^d); the sample is
    certified when every ratio is at most 1 and every local cover is complete.
    """
    pts = as_points(points)
    schedule = sorted((float(e) for e in eps_schedule), reverse=True)
    if not schedule or schedule[-1] <= 0:
        raise PreconditionError("eps schedule must be nonempty and positive")
    tree = cKDTree(pts) if len(pts) else None
    worst, checks = 0.0, 0
    for x in pts:
        for eps in schedule:
            checks += 1
            label = f"x={tuple(float(v) for v in x)}, eps={eps:g}"
            try:
                delta, centers, diameters = locator(x, eps)
            except (PreconditionError, NumericFailure) as exc:
                logger.warning(f"locator failed at {label}: {exc}")
                return CertificateReport(certified=False, checks=checks, worst_ratio=worst,
                                         witness=f"locator failed at {label}: {exc}")
            delta = float(delta)
            if not 0 < delta <= eps * (1 + 1e-12):
                return CertificateReport(certified=False, checks=checks, worst_ratio=worst,
                                         witness=f"delta={delta:g} outside (0, eps] at {label}")
            diameters = np.atleast_1d(np.asarray(diameters, dtype=float))
            mass = float(np.sum(gauge(diameters))) if diameters.size else 0.0
            ratio = mass / (eps * delta ** dim)
            local = pts[tree.query_ball_point(x, delta * (1 - 1e-12))]
            covered = coverage_fraction(local, centers, diameters) if diameters.size else float(not len(local))
            if ratio > worst:
                worst = ratio
            if ratio > 1 + 1e-12 or covered < 1:
                reason = f"sum h / (eps delta^{dim}) = {ratio:.6g}" if ratio > 1 + 1e-12 else f"coverage {covered:.3f}"
                return CertificateReport(certified=False, checks=checks, worst_ratio=worst,
                                         witness=f"{reason} at {label}")
    logger.info(f"zero-measure certificate: {checks} checks, worst ratio {worst:.6g}")
    return CertificateReport(certified=True, checks=checks, worst_ratio=worst)


def assembled_mass(points, gauge: Callable, locator: Locator, eps: float, dim: int = 2) -> float:
    """
    Total h-mass of the local covers over a Besicovitch subfamily of the
    balls B(x, delta(x)); it is at most 4^(2d) eps times the sum of delta^d.
    """
    pts = as_points(points)
    if not len(pts):
        return 0.0
    found = [locator(x, eps) for x in pts]
    deltas = np.array([float(d) for d, _, _ in found])
    chosen = besicovitch_cover(pts, deltas).selected
    total = sum(float(np.sum(gauge(np.atleast_1d(np.asarray(found[i][2], dtype=float))))) for i in chosen)
    logger.info(f"assembled cover: {len(chosen)} local covers, mass {total:.6g}, "
                f"bound {4 ** (2 * dim) * eps * float(np.sum(deltas[chosen] ** dim)):.6g}")
    if not math.isfinite(total):
        raise NumericFailure("assembled cover mass is not finite")
    return total
