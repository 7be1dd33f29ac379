"""
An entire function that is huge in a strip S and bounded outside it:

    f(z) = (1/2 pi i) ∮ exp(e^w(zeta)) / (zeta - z) d zeta    outside S
    f(z) = exp(e^w(z)) + the same integral                  inside S

with w the map of S onto {|Im w| < pi}, replaced here by the approximate
map w^. On the boundary Im w^ = +-pi, so the integrand is exp(-e^Re w^)
and the contour is cut where e^Re w^ passes TRUNCATION_EXP.
"""
import logging
import math
from typing import List, Optional

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

import config
from errors import NumericFailure, PreconditionError
from storage.models import BoundReport
from .ahlfors import integrate_reciprocal
from .profile import StripProfile

logger = logging.getLogger(__name__)

TAIL_TOL = 1e-15
FINE_STEPS = 16  # fine-grid points per node spacing for Re w^
GRID_CAP = 10 ** 7
CHUNK = 4096
MAX_EXPONENT = 700.0


def approx_strip_map(profile: StripProfile, zeta):
    """w^(zeta) = pi int_(x0)^(Re zeta) dt/phi + i pi Im zeta / phi(Re zeta)"""
    zeta = np.asarray(zeta, dtype=complex)
    flat = np.atleast_1d(zeta).ravel()
    out = np.empty(flat.shape, dtype=complex)
    for i, z in enumerate(flat):
        width = float(profile(z.real))
        if abs(z.imag) > width * (1 + 1e-12):
            raise PreconditionError(f"{z} lies outside the closed strip")
        real = math.pi * integrate_reciprocal(profile, profile.x0, z.real) if z.real != profile.x0 else 0.0
        out[i] = complex(real, math.pi * z.imag / width)
    return out.reshape(zeta.shape) if zeta.ndim else complex(out[0])


def _panel_nodes(breaks: np.ndarray, length: float, order: int):
    """Gauss-Legendre nodes and weights on panels of at most `length` between breaks"""
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        count = max(1, int(math.ceil((b - a) / length)))
        edges = np.linspace(a, b, count + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            half = (hi - lo) / 2
            nodes.append(lo + half * (base_x + 1))
            weights.append(half * base_w)
    return np.concatenate(nodes), np.concatenate(weights)


class ApproxEntireFunction:
    """The contour-integral function, scaled by eps; immutable after build"""

    def __init__(self, profile: StripProfile, x_trunc: float, spacing: float, order: int,
                 grid: np.ndarray, re_hat: np.ndarray, tail_bound: float = 0.0):
        self.profile = profile
        self.x_trunc = float(x_trunc)
        self.spacing = float(spacing)
        self.order = order
        self._grid = grid
        self._re_hat = re_hat
        self.tail_bound = tail_bound
        self.eps = 1.0

        zeta, dzeta, values = self._boundary()
        self.nodes = zeta
        self.dzeta = dzeta
        self.values = values
        self._mass = values * dzeta / (2j * math.pi)
        self._tree = cKDTree(np.column_stack([zeta.real, zeta.imag]))

    # -- contour -----------------------------------------------------------

    def re_hat(self, x):
        """Re w^(x) from the fine cumulative grid"""
        return np.interp(np.asarray(x, dtype=float), self._grid, self._re_hat)

    def _breaks(self, lo: float, hi: float) -> np.ndarray:
        inner = [p for p in self.profile.breakpoints if lo < p < hi]
        return np.array(sorted({lo, hi, *inner}))

    def _curves(self):
        """Nodes, weights, phi and phi' along the upper boundary, x increasing"""
        x, w = _panel_nodes(self._breaks(0.0, self.x_trunc), self.order * self.spacing, self.order)
        return x, w, np.asarray(self.profile(x), dtype=float), np.asarray(self.profile.derivative(x), dtype=float)

    def _left_edge(self):
        top = float(self.profile(0.0))
        y, w = _panel_nodes(np.array([-top, top]), self.order * self.spacing, self.order)
        return y, w, top

    def _boundary(self):
        x, w, phi, dphi = self._curves()
        decay = np.exp(-np.exp(self.re_hat(x)))
        upper = x + 1j * phi
        lower = x - 1j * phi
        # S on the right: upper left to right, lower right to left, left edge upward
        d_upper = (1 + 1j * dphi) * w
        d_lower = -(1 - 1j * dphi) * w

        y, wy, top = self._left_edge()
        left = 1j * y
        w_left = self.re_hat(0.0) + 1j * math.pi * y / top
        left_values = np.exp(np.exp(w_left))

        zeta = np.concatenate([upper, lower, left])
        dzeta = np.concatenate([d_upper, d_lower, 1j * wy])
        values = np.concatenate([decay, decay, left_values]).astype(complex)
        return zeta, dzeta, values

    def closed_contour(self):
        """The truncated boundary closed by the right edge x = x_trunc, clockwise"""
        right_top = float(self.profile(self.x_trunc))
        y, wy = _panel_nodes(np.array([-right_top, right_top]), self.order * self.spacing, self.order)
        zeta = np.concatenate([self.nodes, self.x_trunc + 1j * y])
        dzeta = np.concatenate([self.dzeta, -1j * wy])
        return zeta, dzeta

    def winding_number(self, z) -> complex:
        """(1/2 pi i) ∮ d zeta / (zeta - z) over the closed truncated contour"""
        zeta, dzeta = self.closed_contour()
        return complex(np.sum(dzeta / (zeta - complex(z))) / (2j * math.pi))

    # -- evaluation --------------------------------------------------------

    def inside(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return (z.real > 0) & (np.abs(z.imag) < self.profile(z.real))

    def distance_to_contour(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        distance, _ = self._tree.query(np.column_stack([z.real, z.imag]))
        return distance

    def _cauchy(self, z: np.ndarray) -> np.ndarray:
        out = np.empty(z.shape, dtype=complex)
        for start in range(0, z.size, CHUNK):
            block = z[start:start + CHUNK]
            out[start:start + CHUNK] = (self._mass[None, :] / (self.nodes[None, :] - block[:, None])).sum(axis=1)
        return out

    def _residue(self, z: np.ndarray) -> np.ndarray:
        if np.any(z.real > self.x_trunc):
            raise NumericFailure(f"exp(e^w) overflows beyond x = {self.x_trunc:.6g}")
        w_hat = self.re_hat(z.real) + 1j * math.pi * z.imag / self.profile(z.real)
        inner = np.exp(w_hat)
        if np.any(inner.real > MAX_EXPONENT):
            raise NumericFailure("exp(e^w) overflows inside the strip")
        return np.exp(inner)

    def raw(self, z) -> np.ndarray:
        """The unscaled function at points away from the contour"""
        z = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(z).ravel()
        close = self.distance_to_contour(flat) < self.spacing
        if np.any(close):
            raise PreconditionError(f"{flat[close][0]} too close to contour")
        values = self._cauchy(flat)
        mask = self.inside(flat)
        if np.any(mask):
            values[mask] += self._residue(flat[mask])
        return values.reshape(z.shape)

    def __call__(self, z):
        values = self.eps * self.raw(z)
        return complex(values) if np.ndim(values) == 0 else values

    def derivative(self, z, step: float = 1e-6):
        z = np.asarray(z, dtype=complex)
        return (self(z + step) - self(z - step)) / (2 * step)

    # -- normalization -----------------------------------------------------

    def sample_points(self, circle: int = 512, stride: int = 4) -> np.ndarray:
        """|z| = 1 and points just outside the contour"""
        angles = np.linspace(0.0, 2 * math.pi, circle, endpoint=False)
        ring = np.exp(1j * angles)
        offset = 3 * self.spacing
        x, _, phi, _ = self._curves()
        y, _, _ = self._left_edge()
        near = np.concatenate([
            x[::stride] + 1j * (phi[::stride] + offset),
            x[::stride] - 1j * (phi[::stride] + offset),
            -offset + 1j * y[::stride],
        ])
        points = np.concatenate([ring, near])
        return points[self.distance_to_contour(points) >= 2 * self.spacing]

    def normalize(self):
        peak = float(np.max(np.abs(self.raw(self.sample_points()))))
        if not math.isfinite(peak) or peak == 0:
            raise NumericFailure(f"cannot normalize: sampled max |f| = {peak}")
        self.eps = config.NORMALIZATION_TARGET / peak
        logger.info(f"normalized contour function: eps = {self.eps:.6g}")
        return self

    def check_normalization(self, samples: int = 1000, seed: int = 0) -> List[BoundReport]:
        """|f| <= 1/2 on the unit disk and |f| <= 1 off the strip, at random samples"""
        rng = np.random.default_rng(seed)
        radius = np.sqrt(rng.uniform(0, 1, samples))
        disk = radius * np.exp(2j * math.pi * rng.uniform(0, 1, samples))
        disk = disk[self.distance_to_contour(disk) >= 2 * self.spacing]

        width = self.profile.L + 2
        box = rng.uniform(-2, self.x_trunc + 2, samples) + 1j * rng.uniform(-width, width, samples)
        box = box[~self.inside(box) & (self.distance_to_contour(box) >= 2 * self.spacing)]

        reports = []
        for name, points, bound in (("unit_disk", disk, 0.5), ("off_strip", box, 1.0)):
            values = np.abs(self(points)) / bound
            worst = int(np.argmax(values))
            reports.append(BoundReport(
                name=name, ok=bool(values[worst] <= 1), samples=len(points),
                max_slack=float(values[worst]), witness=repr(complex(points[worst])),
            ))
        return reports


def _cumulative_map(profile: StripProfile, spacing: float, x_stop: Optional[float]):
    """Fine grid on [0, X] with Re w^ on it, X where e^(Re w^) first exceeds TRUNCATION_EXP"""
    start = 0.0
    offset = math.pi * integrate_reciprocal(profile, profile.x0, 0.0) if profile.x0 != 0 else 0.0
    level = math.log(config.TRUNCATION_EXP)
    step = spacing / FINE_STEPS
    grids, values = [np.array([0.0])], [np.array([offset])]
    total = 1
    while True:
        chunk = start + step * np.arange(1, CHUNK + 1)
        if x_stop is not None:
            chunk = chunk[chunk <= x_stop]
        if chunk.size == 0:
            break
        previous = np.concatenate([[start], chunk])
        with np.errstate(divide="ignore", over="ignore"):
            reciprocal = 1.0 / np.asarray(profile(previous), dtype=float)
        steps = integrate.cumulative_trapezoid(reciprocal, previous)
        chunk_values = values[-1][-1] + math.pi * steps
        grids.append(chunk)
        values.append(chunk_values)
        total += chunk.size
        past = np.nonzero(chunk_values > level)[0]
        if x_stop is None and past.size:
            cut = past[0] + 1
            grids[-1], values[-1] = chunk[:cut], chunk_values[:cut]
            break
        if total > GRID_CAP:
            raise NumericFailure("truncation abscissa not reached within the grid cap")
        start = chunk[-1]
    grid, re_hat = np.concatenate(grids), np.concatenate(values)
    if not np.all(np.isfinite(re_hat)):
        raise NumericFailure("Re w^ is not finite on the contour grid")
    return grid, re_hat


def contour_function_build(
    profile: StripProfile,
    x_max: Optional[float] = None,
    spacing: Optional[float] = None,
    order: int = 8,
    normalize: bool = True,
) -> ApproxEntireFunction:
    """
    The contour-integral function for the strip of `profile`, cut at x_max
    (or where e^(Re w^) exceeds TRUNCATION_EXP) and scaled so that the
    sampled max of |f| over |z| = 1 and the contour's outer side is 0.4.
    """
    spacing = spacing or config.CONTOUR_NODE_SPACING
    if spacing <= 0:
        raise PreconditionError("node spacing must be positive")
    grid, re_hat = _cumulative_map(profile, spacing, x_max)
    x_trunc = float(grid[-1])
    edge = math.exp(min(re_hat[-1], MAX_EXPONENT))
    tail = 2 * profile.L * math.exp(-edge) / (math.pi * edge)
    if tail > TAIL_TOL:
        raise NumericFailure(f"truncation tail {tail:.3g} above tolerance at x = {x_trunc:.6g}")
    function = ApproxEntireFunction(profile, x_trunc, spacing, order, grid, re_hat, tail)
    logger.info(f"contour function: cut at x = {x_trunc:.6g}, {len(function.nodes)} nodes, tail {tail:.3g}")
    return function.normalize() if normalize else function
