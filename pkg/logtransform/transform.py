"""Evaluation of the logarithmic transform and its derivative bounds"""
import logging
import math
from typing import List

import numpy as np
from scipy import optimize

from errors import NumericFailure, PreconditionError
from storage.models import BoundReport
from .models import ClassBModel, ExponentialModel, TractGrowth, TWO_PI

logger = logging.getLogger(__name__)

GROWTH_SAMPLES = 512
TOLERANCE = 1e-12


def log_transform_eval(model: ClassBModel, z) -> np.ndarray:
    """F(z) for z in the tract U = exp^-1(G)"""
    z = np.asarray(z, dtype=complex)
    inside = model.in_tract(z)
    if not np.all(inside):
        bad = complex(np.ravel(z)[np.argmin(np.ravel(inside))])
        raise PreconditionError(f"z = {bad} is outside the tract of {model.name}")
    return model.F(z)


def _report(name: str, ratios: np.ndarray, points: np.ndarray) -> BoundReport:
    i = int(np.argmax(ratios))
    return BoundReport(
        name=name,
        ok=bool(ratios[i] <= 1 + TOLERANCE),
        samples=int(ratios.size),
        max_slack=float(ratios[i]),
        witness=repr(complex(points[i])),
    )


def check_branch_bounds(model: ClassBModel, w_samples, k: int = 0) -> List[BoundReport]:
    """
    Sampled checks of |phi'(w)| <= 4 pi / (Re w - ln R) on H and of
    |F'(z)| >= (Re F(z) - ln R) / (4 pi) at z = phi(w).
    """
    w = np.ravel(np.asarray(w_samples, dtype=complex))
    if w.size == 0:
        raise PreconditionError("no sample points")
    height = w.real - model.log_R
    if np.any(height <= 0):
        raise PreconditionError("sample points must lie in H = {Re w > ln R}")

    z = model.branch(w, k)
    inverse = np.abs(model.branch_derivative(w)) / (4 * math.pi / height)

    lifted = (model.F(z).real - model.log_R) / (4 * math.pi)
    forward = lifted / np.abs(model.F_prime(z))

    return [_report("inverse_derivative", inverse, w), _report("transform_derivative", forward, z)]


def _exponential_x_star(model: ExponentialModel) -> float:
    # e^x + ln|lambda| - 2x has its minimum at ln 2
    offset = math.log(abs(model.lam))
    gap = lambda x: math.exp(x) - 2 * x + offset
    if gap(math.log(2.0)) >= 0:
        return -math.inf
    return optimize.brentq(gap, math.log(2.0), 2.0 + abs(offset) + 10.0)


def tract_growth(model: ClassBModel, x: float) -> TractGrowth:
    """h(x) = max Re F(x + iy), the maximizer z_x and h'(x)"""
    if not x > model.xi:
        raise PreconditionError(f"need x > xi = {model.xi}, got {x}")

    if isinstance(model, ExponentialModel):
        h = math.exp(x) + math.log(abs(model.lam))
        return TractGrowth(
            h=h,
            z_x=complex(x, 0.0),
            h_prime=math.exp(x),
            x_star=_exponential_x_star(model),
            doubles=h >= 2 * x,
        )

    h, y = _sampled_max(model, x)
    step = 1e-5 * max(1.0, abs(x))
    h_prime = (_sampled_max(model, x + step)[0] - _sampled_max(model, x - step)[0]) / (2 * step)
    if not math.isfinite(h) or not math.isfinite(h_prime):
        raise NumericFailure(f"h is not finite near x = {x}")
    return TractGrowth(h=h, z_x=complex(x, y), h_prime=h_prime, x_star=math.nan, doubles=h >= 2 * x)


def _sampled_max(model: ClassBModel, x: float):
    """Grid search over one period in y, refined by a bounded scalar minimization"""
    ys = np.linspace(-math.pi, math.pi, GROWTH_SAMPLES, endpoint=False)
    with np.errstate(divide="ignore"):
        values = np.log(np.abs(model.f(np.exp(x + 1j * ys))))
    i = int(np.argmax(values))
    width = TWO_PI / GROWTH_SAMPLES
    target = lambda y: -float(np.log(np.abs(model.f(np.exp(complex(x, y))))))
    result = optimize.minimize_scalar(
        target, bounds=(ys[i] - width, ys[i] + width), method="bounded", options={"xatol": 1e-12}
    )
    if -result.fun >= values[i]:
        return float(-result.fun), float(result.x)
    return float(values[i]), float(ys[i])
