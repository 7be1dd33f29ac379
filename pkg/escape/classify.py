"""Horizon-relative escape classification of single orbits"""
import logging
import math
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

import config
from errors import PreconditionError
from logspace import LogValue
from logtransform import ClassBModel
from .orbits import OrbitRecord, iterate_orbit, max_modulus_tower
from .rates import RateSequence

logger = logging.getLogger(__name__)


class EscapeKind(str, Enum):
    BOUNDED = "Bounded"
    WITHIN_RATE = "EscapingWithinRate"
    UNB_VIOLATION = "UnbViolation"
    FAST = "FastEscaping"
    UNDETERMINED = "Undetermined"


# raster codes, matching storage.CLASS_COLORS
CODES = {
    EscapeKind.BOUNDED: 0,
    EscapeKind.WITHIN_RATE: 1,
    EscapeKind.UNB_VIOLATION: 2,
    EscapeKind.FAST: 3,
    EscapeKind.UNDETERMINED: 4,
}


class EscapeClass(BaseModel):
    kind: EscapeKind
    horizon: int
    violations: List[int] = []  # n with |f^n(z)| > p_n
    lag: Optional[int] = None  # L of a fast escaping verdict
    fixed_point: Optional[complex] = None  # center of the trapping disk
    witness: Optional[str] = None

    @property
    def count(self) -> int:
        return len(self.violations)

    @property
    def code(self) -> int:
        return CODES[self.kind]


class TrapCertificate(BaseModel):
    """f(D) inside D for D = D(center, radius): |f(c) - c| < (1 - kappa) r with kappa = max |f'| on D"""
    center: complex
    radius: float
    kappa: float
    drift: float
    ok: bool


def trap_certificate(model: ClassBModel, center: complex, radius: Optional[float] = None,
                     grid: Optional[int] = None) -> TrapCertificate:
    radius = config.TRAP_RADIUS if radius is None else radius
    grid = config.DERIVATIVE_GRID if grid is None else grid
    if radius <= 0:
        raise PreconditionError("trap radius must be positive")
    rho = np.linspace(0.0, radius, grid)
    theta = np.linspace(0.0, 2 * math.pi, grid, endpoint=False)
    disk = center + np.outer(rho, np.exp(1j * theta)).ravel()
    with np.errstate(over="ignore", invalid="ignore"):
        kappa = float(np.max(np.abs(model.fprime(disk))))
        drift = abs(complex(model.f(center)) - center)
    ok = bool(math.isfinite(kappa) and kappa < 1 and drift < (1 - kappa) * radius)
    return TrapCertificate(center=complex(center), radius=radius, kappa=kappa, drift=drift, ok=ok)


def _exceeds(modulus: LogValue, rate: float) -> bool:
    if rate < 0:
        return True
    return modulus > LogValue.from_float(rate)


def fast_lag(record: OrbitRecord, tower: Sequence[LogValue], shift_max: Optional[int] = None) -> Optional[int]:
    """Smallest L <= shift_max with |f^(n+L)(z)| >= M^n(R) for every n + L <= horizon"""
    shift_max = config.FAST_SHIFT_MAX if shift_max is None else shift_max
    if record.overflowed or record.steps < record.horizon:
        return None
    if not all(a < b for a, b in zip(tower, tower[1:])):
        # M^n(R) does not increase; R is below the escaping range of M
        return None
    for lag in range(shift_max + 1):
        last = record.horizon - lag
        if last < 1:
            break
        if all(record.moduli[n + lag].approx_ge(tower[n], 1e-12) for n in range(last + 1)):
            return lag
    return None


def _bounded(model: ClassBModel, record: OrbitRecord) -> Optional[TrapCertificate]:
    if record.overflowed or record.steps < record.horizon:
        return None
    window = min(config.TRAP_RUN, max(1, record.horizon // 2))
    tail = record.iterates[-window:]
    center = tail[-1]
    if not math.isfinite(abs(center)):
        return None
    if max(abs(z - center) for z in tail) >= config.TRAP_RADIUS:
        return None
    certificate = trap_certificate(model, center)
    return certificate if certificate.ok else None


def _monotone_tail(record: OrbitRecord) -> bool:
    burn_in = record.horizon // 2
    tail = record.moduli[burn_in:]
    return len(tail) > 1 and all(a < b for a, b in zip(tail, tail[1:]))


def classify_orbit(model: ClassBModel, z0: complex, rate: RateSequence, horizon: int,
                   fast_base: Optional[float] = None,
                   tower: Optional[Sequence[LogValue]] = None) -> Tuple[EscapeClass, OrbitRecord]:
    """
    Verdict at the horizon, checked in the order Bounded, FastEscaping,
    UnbViolation, EscapingWithinRate. Rate violations are reported with
    every verdict.
    """
    fast_base = config.FAST_BASE_R if fast_base is None else fast_base
    record = iterate_orbit(model, z0, horizon)
    if tower is None:
        tower = max_modulus_tower(model, fast_base, horizon)
    rates = rate.values(record.steps) if record.steps else np.array([])
    violations = [n for n in range(1, record.steps + 1) if _exceeds(record.moduli[n], rates[n - 1])]
    verdict = dict(horizon=horizon, violations=violations)

    trap = _bounded(model, record)
    if trap is not None:
        return EscapeClass(kind=EscapeKind.BOUNDED, fixed_point=trap.center,
                           witness=f"kappa={trap.kappa:.4g}", **verdict), record

    lag = fast_lag(record, tower)
    if lag is not None:
        return EscapeClass(kind=EscapeKind.FAST, lag=lag, **verdict), record

    tail_start = horizon // 2
    if any(n > tail_start for n in violations):
        return EscapeClass(kind=EscapeKind.UNB_VIOLATION, **verdict), record
    if not record.overflowed and _monotone_tail(record):
        return EscapeClass(kind=EscapeKind.WITHIN_RATE, **verdict), record
    witness = "overflow before the horizon" if record.overflowed else None
    return EscapeClass(kind=EscapeKind.UNDETERMINED, witness=witness, **verdict), record


def fixed_point_estimate(model: ClassBModel, z0: complex, horizon: int) -> complex:
    """The last iterate of a bounded orbit"""
    verdict, _ = classify_orbit(model, z0, RateSequence.parse("n"), horizon)
    if verdict.kind != EscapeKind.BOUNDED:
        raise PreconditionError(f"orbit of {z0} is not certified bounded: {verdict.kind.value}")
    return verdict.fixed_point
