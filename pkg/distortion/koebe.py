"""Koebe distortion and quarter bounds, and contraction certificates for conformal branches"""
import logging
import math
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

import config
from errors import PreconditionError
from storage.models import BoundReport, ContractionCertificate

logger = logging.getLogger(__name__)

EPSILON = 1e-9


class Disk(NamedTuple):
    center: complex
    radius: float


def _check_lambda(lam: float) -> float:
    if not 0 < lam < 1:
        raise PreconditionError(f"need 0 < lambda < 1, got {lam}")
    return float(lam)


def koebe_ratio_bounds(gprime_a: float, lam: float) -> Tuple[float, float]:
    """Bounds of |g(z) - g(a)| / |z - a| for |z - a| <= lam*r"""
    lam = _check_lambda(lam)
    if gprime_a <= 0:
        raise PreconditionError("|g'(a)| must be positive")
    return gprime_a / (1 + lam) ** 2, gprime_a / (1 - lam) ** 2


def koebe_derivative_bounds(gprime_a: float, lam: float) -> Tuple[float, float]:
    """Bounds of |g'(z)| for |z - a| <= lam*r"""
    lam = _check_lambda(lam)
    if gprime_a <= 0:
        raise PreconditionError("|g'(a)| must be positive")
    return gprime_a * (1 - lam) / (1 + lam) ** 3, gprime_a * (1 + lam) / (1 - lam) ** 3


def koebe_distortion_constant(lam: float) -> float:
    """Ratio of the derivative bounds; the same for every univalent map"""
    lam = _check_lambda(lam)
    return ((1 + lam) / (1 - lam)) ** 4


def koebe_quarter(g_a: complex, gprime_a: float, r: float) -> Disk:
    """The disk D(g(a), |g'(a)| r / 4) inside g(D(a, r))"""
    if r <= 0 or gprime_a <= 0:
        raise PreconditionError("need r > 0 and |g'(a)| > 0")
    return Disk(complex(g_a), gprime_a * r / 4)


def verify_quarter_containment(
    g: Callable[[np.ndarray], np.ndarray], a: complex, r: float, disk: Disk, n: int = 4096
) -> BoundReport:
    """Whether the image of the circle |z - a| = r stays outside the quarter disk"""
    theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    boundary = np.asarray(g(a + r * (1 - EPSILON) * np.exp(1j * theta)), dtype=complex)
    distance = np.abs(boundary - disk.center)
    i = int(np.argmin(distance))
    ratio = disk.radius / distance[i] if distance[i] > 0 else math.inf
    return BoundReport(
        name="quarter_disk",
        ok=bool(ratio <= 1 + EPSILON),
        samples=n,
        max_slack=float(ratio),
        witness=repr(complex(boundary[i])),
    )


def koebe_rotation_bound(lam: float) -> float:
    """Bound of |arg g'(z) - arg g'(a)| for |z - a| <= lam*r"""
    lam = _check_lambda(lam)
    return 2 * math.log((1 + lam) / (1 - lam))


def _numeric_derivative(branch: Callable, step: float) -> Callable[[np.ndarray], np.ndarray]:
    def derivative(z):
        z = np.asarray(z, dtype=complex)
        return (branch(z + step) - branch(z - step)) / (2 * step)

    return derivative


def _grid(center: complex, half_side: float, n: int) -> np.ndarray:
    axis = np.linspace(-half_side, half_side, n)
    re, im = np.meshgrid(axis, axis)
    return center + re + 1j * im


def _winding(values: np.ndarray) -> int:
    """Turns of a closed sampled curve around 0"""
    steps = np.angle(np.roll(values, -1) / values)
    return int(round(float(np.sum(steps)) / (2 * np.pi)))


def certify_branch_contraction(
    branch: Callable[[np.ndarray], np.ndarray],
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    center: complex = 0.5 + 0.5j,
    half_side: float = 0.5,
    padding: Optional[float] = None,
    grid: Optional[int] = None,
) -> ContractionCertificate:
    """
    Certified chord-ratio bounds of a conformal branch on the square S(center, half_side).

    The branch must be univalent on D(center, r/padding), r the circumradius
    of the square; this is sample-checked through its derivative. Every
    point of the square lies within delta of a mesh point a, and g is
    univalent on D(a, r/padding - r), so Koebe bounds |g'| and arg g' there
    from the sample at a. On a convex set the chord ratio is at least
    min|g'| times the cosine of half the spread of arg g'.

    K depends on padding alone: ((1 + padding)/(1 - padding))^4.
    """
    padding = config.KOEBE_PADDING if padding is None else padding
    grid = config.DERIVATIVE_GRID if grid is None else grid
    if half_side <= 0 or grid < 2:
        raise PreconditionError("need half_side > 0 and grid >= 2")
    _check_lambda(padding)
    if derivative is None:
        derivative = _numeric_derivative(branch, 1e-6 * max(1.0, half_side))

    radius = math.sqrt(2) * half_side
    univalent = radius / padding
    theta = np.linspace(0.0, 2 * np.pi, 16 * grid, endpoint=False)
    circle = np.asarray(derivative(center + univalent * (1 - EPSILON) * np.exp(1j * theta)), dtype=complex)
    if not np.all(np.isfinite(circle)) or np.min(np.abs(circle)) <= 1e-300:
        raise PreconditionError("derivative vanishes or blows up on the univalence circle")
    # g' has neither zeros nor poles inside
    if _winding(circle) != 0:
        raise PreconditionError("derivative winds around 0 on the univalence circle; branch is not univalent")

    d = np.asarray(derivative(_grid(center, half_side, grid)), dtype=complex)
    modulus = np.abs(d)
    if not np.all(np.isfinite(d)) or modulus.min() <= 1e-300:
        raise PreconditionError("derivative vanishes on the square; branch is not univalent")

    # mesh cells have half-diagonal delta; every mesh point keeps univalent - radius to spare
    delta = radius / (grid - 1)
    local = delta / (univalent - radius)
    if local >= 1:
        raise PreconditionError(f"mesh too coarse for padding {padding}: grid={grid}")
    low_factor, high_factor = koebe_derivative_bounds(1.0, local)

    reference = d[grid // 2, grid // 2]
    angles = np.angle(d / reference)
    spread = float(angles.max() - angles.min()) + 2 * koebe_rotation_bound(local)
    if spread >= math.pi:
        raise PreconditionError(f"arg of the derivative spreads over {spread:.3g} >= pi on the square")

    b_lower = float(modulus.min() * low_factor * math.cos(spread / 2))
    c_upper = float(modulus.max() * high_factor)
    koebe_k = koebe_distortion_constant(padding)
    if c_upper > koebe_k * b_lower:
        logger.warning(f"certified c/b = {c_upper / b_lower:.6g} exceeds K = {koebe_k:.6g}")
    logger.debug(f"certified b={b_lower:.6g}, c={c_upper:.6g}, local Koebe ratio {local:.3g}")
    return ContractionCertificate(
        b_lower=b_lower,
        c_upper=c_upper,
        koebe_k=koebe_k,
        padding=padding,
        samples=grid * grid,
        derivative_min=float(modulus.min()),
        derivative_max=float(modulus.max()),
    )


def chord_ratio_check(
    branch: Callable[[np.ndarray], np.ndarray],
    certificate: ContractionCertificate,
    center: complex = 0.5 + 0.5j,
    half_side: float = 0.5,
    pairs: int = 10000,
    seed: int = 0,
) -> BoundReport:
    """Sampled |T(z) - T(w)| / |z - w| against the certified interval"""
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-half_side, half_side, size=(2, pairs, 2))
    z = center + offsets[0, :, 0] + 1j * offsets[0, :, 1]
    w = center + offsets[1, :, 0] + 1j * offsets[1, :, 1]
    ratios = np.abs(branch(z) - branch(w)) / np.abs(z - w)
    low = ratios.min() / certificate.b_lower
    high = ratios.max() / certificate.c_upper
    ok = bool(ratios.min() >= certificate.b_lower * (1 - EPSILON) and high <= 1 + EPSILON)
    worst = z[np.argmin(ratios)] if low < 1 else z[np.argmax(ratios)]
    return BoundReport(
        name="chord_ratio",
        ok=ok,
        samples=pairs,
        max_slack=float(max(1 / low, high)),
        witness=repr(complex(worst)),
    )
