"""Greedy Besicovitch covers and grid multiplicity counts"""
import logging
import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel
from scipy.spatial import cKDTree

import config
from errors import PreconditionError
from .premeasure import as_points

logger = logging.getLogger(__name__)

PLANE_MULTIPLICITY = 4 ** 4
OPEN = 1 - 1e-12  # open balls for the tree queries


class BesicovitchCover(BaseModel):
    selected: List[int]
    covered: bool
    multiplicity: int
    grid_points: int


def _radii(pts: np.ndarray, radii) -> np.ndarray:
    r = np.broadcast_to(np.asarray(radii, dtype=float), (len(pts),)).copy()
    if np.any(~(r > 0)) or not np.all(np.isfinite(r)):
        raise PreconditionError("radii must be positive and finite")
    return r


def select_centers(points, radii) -> List[int]:
    """
    Largest radius first, each point not yet inside a selected ball
    becomes a center. Ties keep input order.
    """
    pts = as_points(points)
    if not len(pts):
        return []
    r = _radii(pts, radii)
    tree = cKDTree(pts)
    covered = np.zeros(len(pts), dtype=bool)
    selected = []
    for i in np.argsort(-r, kind="stable"):
        if covered[i]:
            continue
        selected.append(int(i))
        covered[tree.query_ball_point(pts[i], r[i] * OPEN)] = True
        covered[i] = True
    return selected


def grid_multiplicity(centers, radii, spacing: Optional[float] = None) -> tuple:
    """
    Largest number of open balls B(c, r) containing one point of a sample
    grid over their bounding box. Returns (multiplicity, grid point count).
    """
    pts = as_points(centers)
    if not len(pts):
        return 0, 0
    r = _radii(pts, radii)
    lo = (pts - r[:, None]).min(axis=0)
    hi = (pts + r[:, None]).max(axis=0)
    step = float(r.min() / 4 if spacing is None else spacing)
    sizes = np.ceil((hi - lo) / step).astype(int) + 1
    total = int(np.prod(sizes))
    if total > config.MULTIPLICITY_GRID_CAP:
        coarse = step * (total / config.MULTIPLICITY_GRID_CAP) ** (1.0 / pts.shape[1])
        logger.warning(f"multiplicity grid of {total} points exceeds cap; spacing {step:.3g} -> {coarse:.3g}")
        step = coarse
        sizes = np.ceil((hi - lo) / step).astype(int) + 1
    axes = [lo[k] + step * np.arange(sizes[k]) for k in range(pts.shape[1])]
    points = np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")], axis=1)
    counts = np.zeros(len(points), dtype=np.int64)
    tree = cKDTree(points)
    for hits in tree.query_ball_point(pts, r * OPEN):
        counts[hits] += 1
    return int(counts.max()), len(points)


def besicovitch_cover(points, radii, spacing: Optional[float] = None) -> BesicovitchCover:
    """A subfamily of the balls B(x, r(x)) covering the sample with bounded overlap"""
    pts = as_points(points)
    if not len(pts):
        return BesicovitchCover(selected=[], covered=True, multiplicity=0, grid_points=0)
    r = _radii(pts, radii)
    selected = select_centers(pts, r)

    tree = cKDTree(pts[selected])
    inside = np.zeros(len(pts), dtype=bool)
    for j, hits in enumerate(tree.query_ball_point(pts, r.max())):
        inside[j] = any(np.linalg.norm(pts[j] - pts[selected[h]]) < r[selected[h]] for h in hits)
    multiplicity, grid_points = grid_multiplicity(pts[selected], r[selected], spacing)
    if pts.shape[1] == 2 and multiplicity > PLANE_MULTIPLICITY:
        logger.warning(f"grid multiplicity {multiplicity} exceeds {PLANE_MULTIPLICITY}")
    logger.info(f"Besicovitch cover: {len(selected)} of {len(pts)} balls, multiplicity {multiplicity}")
    return BesicovitchCover(selected=selected, covered=bool(inside.all()), multiplicity=multiplicity, grid_points=grid_points)


def coverage_fraction(points, centers, diameters) -> float:
    """Share of points inside some closed ball of the given diameters"""
    pts = as_points(points)
    if not len(pts):
        return 1.0
    c = as_points(centers)
    if not len(c):
        return 0.0
    half = np.asarray(diameters, dtype=float) / 2
    tree = cKDTree(c)
    inside = np.zeros(len(pts), dtype=bool)
    for j, hits in enumerate(tree.query_ball_point(pts, float(half.max()) * (1 + 1e-12))):
        inside[j] = any(math.dist(pts[j], c[h]) <= half[h] * (1 + 1e-12) for h in hits)
    return float(inside.mean())
