"""
Upper estimates of the Hausdorff pre-measure of sampled sets, box-counting
dimension, and the transfer of covers through Lipschitz maps.
"""
import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

import config
from errors import PreconditionError
from storage.models import BoundReport

logger = logging.getLogger(__name__)

STRATEGIES = ("grid", "greedy-merge")
SHRINK = 1 - 1e-12  # keeps diameters strictly below delta


def as_points(points) -> np.ndarray:
    """(n, d) float array from complex, 1-d real or (n, d) input"""
    arr = np.asarray(points)
    if arr.size == 0:
        return np.zeros((0, 1))
    if np.iscomplexobj(arr):
        arr = arr.ravel()
        return np.column_stack([arr.real, arr.imag])
    arr = arr.astype(float)
    return arr[:, None] if arr.ndim == 1 else arr


class CoverSet:
    """A delta-cover of a point sample: element diameters and the element of each point"""

    def __init__(self, diameters: np.ndarray, labels: np.ndarray, delta: float, strategy: str):
        self.diameters = np.asarray(diameters, dtype=float)
        self.labels = np.asarray(labels, dtype=int)
        self.delta = float(delta)
        self.strategy = strategy
        if self.diameters.size and not np.all(self.diameters < self.delta):
            raise PreconditionError("cover element with diameter >= delta")

    def __len__(self) -> int:
        return len(self.diameters)

    def mass(self, gauge: Callable) -> float:
        """Sum of h(diam A_j)"""
        if not len(self):
            return 0.0
        return float(np.sum(np.asarray(gauge(self.diameters), dtype=float)))


def _set_diameters(points: np.ndarray, labels: np.ndarray, count: int) -> np.ndarray:
    """Bounding-box diagonal of each labelled group"""
    lo = np.full((count, points.shape[1]), np.inf)
    hi = np.full((count, points.shape[1]), -np.inf)
    np.minimum.at(lo, labels, points)
    np.maximum.at(hi, labels, points)
    return np.sqrt(np.sum((hi - lo) ** 2, axis=1))


def _piece_diameters(points: np.ndarray, labels: np.ndarray, count: int) -> np.ndarray:
    """Largest pairwise distance inside each labelled group"""
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(count + 1))
    out = np.zeros(count)
    for j in range(count):
        group = points[order[bounds[j]:bounds[j + 1]]]
        if len(group) > 1:
            out[j] = pdist(group).max()
    return out


def grid_cover(points, delta: float) -> CoverSet:
    """Occupied cells of a grid whose cells have diameter just below delta"""
    pts = as_points(points)
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    if not len(pts):
        return CoverSet(np.array([]), np.array([], dtype=int), delta, "grid")
    side = delta * SHRINK / math.sqrt(pts.shape[1])
    cells = np.floor((pts - pts.min(axis=0)) / side).astype(np.int64)
    _, labels = np.unique(cells, axis=0, return_inverse=True)
    labels = labels.ravel()
    count = int(labels.max()) + 1
    return CoverSet(np.full(count, side * math.sqrt(pts.shape[1])), labels, delta, "grid")


def greedy_cover(points, delta: float) -> CoverSet:
    """
    Sweep in lexicographic order: each uncovered point anchors a group of
    the uncovered points within delta/2 of anchor + delta/2 along the first axis.
    """
    pts = as_points(points)
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    if not len(pts):
        return CoverSet(np.array([]), np.array([], dtype=int), delta, "greedy-merge")
    order = np.lexsort(pts.T[::-1])
    tree = cKDTree(pts)
    labels = np.full(len(pts), -1)
    radius = delta * SHRINK / 2
    shift = np.zeros(pts.shape[1])
    shift[0] = radius
    count = 0
    for i in order:
        if labels[i] >= 0:
            continue
        members = np.asarray(tree.query_ball_point(pts[i] + shift, radius), dtype=int)
        members = members[labels[members] < 0]
        labels[members] = count
        labels[i] = count
        count += 1
    diameters = np.minimum(_set_diameters(pts, labels, count), 2 * radius)
    return CoverSet(diameters, labels, delta, "greedy-merge")


def build_cover(points, delta: float, strategy: str = "grid") -> CoverSet:
    if strategy not in STRATEGIES:
        raise PreconditionError(f"unknown cover strategy: {strategy}")
    if strategy == "grid":
        return grid_cover(points, delta)
    return greedy_cover(points, delta)


def premeasure_upper(points, gauge: Callable, delta: float, strategy: str = "grid",
                     refinements: Optional[int] = None) -> float:
    """
    Sum of h(diam A_j) for the best of the covers built at delta, delta/2, ...

    Any cover with smaller diameters is also a delta-cover, so the estimate
    is an upper bound of H_h^delta of the sample.
    """
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    levels = config.REFINEMENT_LEVELS if refinements is None else refinements
    masses = [build_cover(points, delta / 2 ** j, strategy).mass(gauge) for j in range(levels + 1)]
    best = min(masses)
    logger.debug(f"premeasure {strategy} at delta={delta:g}: {best:.6g} (levels {masses})")
    return best


def premeasure_profile(points, gauge: Callable, deltas: Sequence[float], strategy: str = "grid") -> List[float]:
    """Estimates for several deltas, nonincreasing in delta"""
    ordered = sorted(float(d) for d in deltas)
    raw = [premeasure_upper(points, gauge, d, strategy, refinements=0) for d in ordered]
    running = np.minimum.accumulate(raw)
    by_delta = dict(zip(ordered, running))
    return [float(by_delta[float(d)]) for d in deltas]


class BoxDimension(BaseModel):
    slope: float
    intercept: float
    residual: float
    scales: List[float]
    counts: List[int]


def box_counts(points, scales: Sequence[float]) -> List[int]:
    pts = as_points(points)
    lo = pts.min(axis=0)
    counts = []
    for eps in scales:
        cells = np.floor((pts - lo) / eps).astype(np.int64)
        counts.append(int(len(np.unique(cells, axis=0))))
    return counts


def box_dimension(points, scales: Optional[Sequence[float]] = None) -> BoxDimension:
    """Least-squares slope of log N(eps) against log(1/eps) over dyadic scales"""
    pts = as_points(points)
    if not len(pts):
        raise PreconditionError("box dimension of an empty sample")
    extent = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
    if extent == 0:
        if len(pts) > 1:
            raise PreconditionError("degenerate sample: all points are equal")
        return BoxDimension(slope=0.0, intercept=0.0, residual=0.0, scales=[], counts=[1])
    if scales is None:
        top = int(np.clip(math.floor(math.log2(len(pts)) / 2), 4, 10))
        scales = [extent * (1 + 1e-9) / 2 ** k for k in range(1, top + 1)]
    scales = [float(s) for s in scales]
    if len(scales) < 4:
        raise PreconditionError("box counting needs at least 4 scales")
    counts = box_counts(pts, scales)
    x = np.log(1.0 / np.asarray(scales))
    y = np.log(np.asarray(counts, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return BoxDimension(slope=float(slope), intercept=float(intercept), residual=residual,
                        scales=scales, counts=counts)


def lipschitz_image_check(points, mapping: Callable, lipschitz: float, gauge, delta: float) -> BoundReport:
    """
    Push a delta-cover through a map with Lipschitz constant L: each image
    piece has diameter <= L diam A_j, and
        sum h(diam f(A_j)) <= K^ceil(log2 L) sum h(diam A_j)
    with K the doubling constant of h.
    """
    if lipschitz < 1:
        raise PreconditionError("Lipschitz constant below 1; use L = 1")
    pts = as_points(points)
    cover = grid_cover(pts, delta)
    image = as_points(mapping(pts[:, 0] + 1j * pts[:, 1]) if pts.shape[1] == 2 else mapping(pts[:, 0]))
    image_diameters = _piece_diameters(image, cover.labels, len(cover))
    source_diameters = _piece_diameters(pts, cover.labels, len(cover))
    stretch = float(np.max(image_diameters / np.maximum(source_diameters * lipschitz, 1e-300)))
    steps = max(0, math.ceil(math.log2(lipschitz)))
    doubling = gauge.doubling_constant(float(np.max(cover.diameters)) * 2 ** max(steps - 1, 0))
    lhs = float(np.sum(gauge(image_diameters)))
    rhs = doubling ** steps * cover.mass(gauge)
    ratio = max(lhs / rhs, stretch) if rhs > 0 else math.inf
    logger.info(f"Lipschitz image: sum h = {lhs:.6g}, bound {rhs:.6g}, K = {doubling:.6g}")
    return BoundReport(name="lipschitz_image", ok=ratio <= 1 + 1e-12, samples=len(cover),
                       max_slack=ratio, witness=f"K={doubling:.6g}, steps={steps}")
