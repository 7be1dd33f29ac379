"""
Two-sided distortion bounds for the conformal map of a strip S onto
{|Im w| < pi}, and the growth cap they give for the associated function.
"""
import logging
import math
import warnings
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel
from scipy import integrate
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

import config
from errors import NumericFailure, PreconditionError
from .profile import StripProfile

logger = logging.getLogger(__name__)

AHLFORS_THRESHOLD = 4.0


class AhlforsBound(BaseModel):
    value: float
    integral: float
    applicable: bool = True


class GrowthCapReport(BaseModel):
    """Smallest C with ln ln |f(z)| <= C / phi(|z| + 8 phi(|z|))^4 at the samples"""
    c_fit: float
    samples: int
    ok: bool
    witness: Optional[str] = None


def _quad_once(profile: StripProfile, a: float, b: float, limit: int) -> float:
    points = [p for p in profile.breakpoints if a < p < b] or None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(
                lambda x: 1.0 / float(profile(x)), a, b, epsabs=0.0, epsrel=config.QUAD_RTOL, limit=limit, points=points
            )
        except integrate.IntegrationWarning as exc:
            raise NumericFailure(f"quadrature of 1/phi on [{a}, {b}] with limit {limit}: {exc}") from exc
    if not math.isfinite(value):
        raise NumericFailure(f"quadrature of 1/phi on [{a}, {b}] is not finite")
    return value


def integrate_reciprocal(profile: StripProfile, a: float, b: float) -> float:
    """The integral of 1/phi from a to b; the subdivision limit grows on each retry"""
    for attempt in Retrying(
        stop=stop_after_attempt(config.QUAD_RETRIES),
        retry=retry_if_exception_type(NumericFailure),
        reraise=True,
    ):
        with attempt:
            limit = config.QUAD_LIMIT * 4 ** (attempt.retry_state.attempt_number - 1)
            return _quad_once(profile, a, b, limit)


def ahlfors_lower(profile: StripProfile, x1: float, x2: float) -> AhlforsBound:
    """pi * int dx/phi - 8 pi, a lower bound for min Re w(x2) - max Re w(x1)"""
    if x2 <= x1:
        raise PreconditionError(f"need x2 > x1, got [{x1}, {x2}]")
    total = integrate_reciprocal(profile, x1, x2)
    if total <= AHLFORS_THRESHOLD:
        logger.debug(f"Ahlfors lower bound inapplicable on [{x1}, {x2}]: integral {total:.6g} <= 4")
        return AhlforsBound(value=math.nan, integral=total, applicable=False)
    return AhlforsBound(value=math.pi * total - 8 * math.pi, integral=total)


def ahlfors_upper(profile: StripProfile, x1: float, x2: float) -> AhlforsBound:
    """pi * int dx/phi + 8 pi L^4 / phi(x2)^4 for a decreasing profile"""
    total = integrate_reciprocal(profile, x1, x2)
    width = float(profile(x2))
    return AhlforsBound(value=math.pi * total + 8 * math.pi * profile.L ** 4 / width ** 4, integral=total)


def upper_abscissa(profile: StripProfile, x: float) -> float:
    """x + 8 phi(x), the right end of the level curve through x"""
    return float(x + 8 * profile(x))


def tract_growth_bound(profile: StripProfile, x: float, C: float = 1.0) -> float:
    """C / phi(x + 8 phi(x))^4"""
    if float(profile(x)) > 1.0 / x * (1 + 1e-12):
        raise PreconditionError(f"phi({x}) > 1/{x}: growth bound needs phi(x) <= 1/x")
    return C / float(profile(upper_abscissa(profile, x))) ** 4


def growth_cap_check(function, profile: StripProfile, zs: Sequence[complex], C: Optional[float] = None) -> GrowthCapReport:
    """
    Fit C in |f(z)| <= exp(exp(C / phi(|z| + 8 phi(|z|))^4)) over sample points.

    Samples with |f| <= e put no constraint on C.
    """
    zs = np.asarray(zs, dtype=complex)
    worst, witness = 0.0, None
    for z in zs:
        modulus = abs(complex(function(z)))
        if not math.isfinite(modulus):
            raise NumericFailure(f"f({z}) is not finite")
        if modulus <= math.e:
            continue
        r = abs(z)
        needed = math.log(math.log(modulus)) * float(profile(upper_abscissa(profile, r))) ** 4
        if needed > worst:
            worst, witness = needed, repr(complex(z))
    ok = math.isfinite(worst) and (C is None or worst <= C)
    logger.info(f"growth cap: C fit = {worst:.6g} over {len(zs)} samples")
    return GrowthCapReport(c_fit=worst, samples=len(zs), ok=ok, witness=witness)
