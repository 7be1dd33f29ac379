"""
Orbit iteration with overflow guards.

Real orbits of lambda e^z with lambda > 0 continue in log space once they
leave the float range; other orbits stop there after recording the
log-modulus of the first unrepresentable iterate.
"""
import logging
import math
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

import config
from errors import NumericFailure, PreconditionError
from logspace import LogValue
from logtransform import ClassBModel, ExponentialModel
from storage.models import BoundReport

logger = logging.getLogger(__name__)


class OrbitRecord(BaseModel):
    """z_0..z_N with moduli and the running sum of ln |f'(z_k)|"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    z0: complex
    iterates: List[complex]  # inf once the orbit is tracked by modulus only
    moduli: List[LogValue]
    log_derivative: List[float]  # entry n is sum_(k<n) ln |f'(z_k)|
    horizon: int
    overflowed: bool = False

    @property
    def steps(self) -> int:
        """Largest n with |z_n| known"""
        return len(self.moduli) - 1

    def log_modulus(self, n: int) -> float:
        return self.moduli[n].log()

    def chain_rule_residual(self, model: ClassBModel) -> float:
        """Largest gap between stored and recomputed sum ln |f'(z_k)| over finite iterates"""
        finite = [z for z in self.iterates if math.isfinite(abs(z))]
        count = min(len(finite), len(self.log_derivative) - 1)
        if count == 0:
            return 0.0
        z = np.array(finite[:count])
        if isinstance(model, ExponentialModel):
            # ln |lambda e^z| without forming e^z
            terms = math.log(abs(model.lam)) + z.real
        else:
            terms = np.log(np.abs(model.fprime(z)))
        recomputed = np.concatenate([[0.0], np.cumsum(terms)])
        stored = np.array(self.log_derivative[:count + 1])
        return float(np.max(np.abs(recomputed - stored) / np.maximum(1.0, np.abs(stored))))

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for n, modulus in enumerate(self.moduli):
            z = self.iterates[n] if n < len(self.iterates) else complex(math.inf, 0.0)
            rows.append({
                "n": n,
                "re": z.real,
                "im": z.imag,
                "log_modulus": modulus.log(),
                "log_depth": modulus.depth,
                "log_level": modulus.level,
                "log_derivative_sum": self.log_derivative[n] if n < len(self.log_derivative) else math.nan,
            })
        return pd.DataFrame(rows)


def _real_log_orbit(model: ExponentialModel) -> bool:
    return model.lam.imag == 0 and model.lam.real > 0


def iterate_real_log(lam: float, x0: float, n: int) -> List[LogValue]:
    """x_0..x_n of x -> lam e^x for lam > 0, x0 >= 0, entirely in log space"""
    if lam <= 0 or x0 < 0:
        raise PreconditionError("log-space real iteration needs lam > 0 and x0 >= 0")
    values = [LogValue.from_float(x0)]
    for _ in range(n):
        values.append(LogValue.exp(values[-1]) * lam)
    return values


def iterate_orbit(model: ClassBModel, z0: complex, horizon: int) -> OrbitRecord:
    """Iterate up to the horizon; switch to log space or stop on overflow"""
    if horizon < 1:
        raise PreconditionError("horizon must be at least 1")
    z = complex(z0)
    iterates, moduli, log_derivative = [z], [LogValue.from_float(abs(z))], [0.0]
    exponential = isinstance(model, ExponentialModel)
    overflowed = False
    for _ in range(horizon):
        if exponential:
            # ln |lambda e^z| = ln |lambda| + Re z, with f' = f
            log_next = math.log(abs(model.lam)) + z.real
            if log_next > math.log(config.OVERFLOW_MODULUS):
                moduli.append(LogValue.from_log(log_next))
                log_derivative.append(log_derivative[-1] + log_next)
                if z.imag == 0 and _real_log_orbit(model):
                    logger.debug(f"orbit of {z0} leaves the float range; continuing in log space")
                    _continue_real(model, moduli, log_derivative, horizon)
                    iterates += [complex(math.inf, 0.0)] * (len(moduli) - len(iterates))
                else:
                    overflowed = True
                break
        w = complex(model.f(z))
        if math.isnan(w.real) or math.isnan(w.imag):
            raise NumericFailure(f"orbit of {z0} produced NaN after {len(iterates) - 1} steps")
        if not math.isfinite(abs(w)) or abs(w) > config.OVERFLOW_MODULUS:
            overflowed = True
            break
        if exponential:
            # |f(z)| may underflow to 0 far left; its log does not
            log_step, modulus = log_next, LogValue.from_log(log_next)
        else:
            derivative = abs(complex(model.fprime(z)))
            log_step = math.log(derivative) if derivative > 0 else -math.inf
            modulus = LogValue.from_float(abs(w))
        log_derivative.append(log_derivative[-1] + log_step)
        z = w
        iterates.append(z)
        moduli.append(modulus)
    return OrbitRecord(z0=complex(z0), iterates=iterates, moduli=moduli, log_derivative=log_derivative,
                       horizon=horizon, overflowed=overflowed)


def _continue_real(model: ExponentialModel, moduli: List[LogValue], log_derivative: List[float], horizon: int):
    """Extend a positive real orbit x -> lam e^x in log space"""
    lam = model.lam.real
    while len(moduli) <= horizon:
        nxt = LogValue.exp(moduli[-1]) * lam
        moduli.append(nxt)
        # ln f'(x_k) = ln x_(k+1)
        log_derivative.append(log_derivative[-1] + nxt.log())


def iterated_max_modulus(model: ClassBModel, R: float, n: int) -> LogValue:
    """M^n(R) as a LogValue"""
    return max_modulus_tower(model, R, n)[-1]


def max_modulus_tower(model: ClassBModel, R: float, n: int) -> List[LogValue]:
    """M^0(R), ..., M^n(R)"""
    if R <= 0 or n < 0:
        raise PreconditionError("need R > 0 and n >= 0")
    tower = [LogValue.from_float(R)]
    for k in range(n):
        try:
            tower.append(model.max_modulus_log(tower[-1]))
        except OverflowError as exc:
            raise NumericFailure(f"M^{k + 1}({R}) leaves the range of a sampled maximum modulus") from exc
    return tower


def derivative_cauchy_check(model: ClassBModel, r: float, R_big: float, samples: Optional[int] = None) -> BoundReport:
    """max |f'| on |z| = r against max_(|z| <= R) |f| / (R - r)"""
    if not R_big > r > 0:
        raise PreconditionError(f"need R > r > 0, got r={r}, R={R_big}")
    count = samples or config.DERIVATIVE_GRID * 16
    theta = np.linspace(0.0, 2 * math.pi, count, endpoint=False)
    ring = r * np.exp(1j * theta)
    derivative = np.abs(model.fprime(ring))
    lhs = float(np.max(derivative))
    rhs = model.max_modulus(R_big) / (R_big - r)
    witness = repr(complex(ring[int(np.argmax(derivative))]))
    return BoundReport(name="cauchy_derivative", ok=lhs <= rhs * (1 + 1e-12), samples=count,
                       max_slack=lhs / rhs, witness=witness)
