"""
Iterated function schemes built from inverse branches of the logarithmic
transform, normalized to the unit square.

P_k collects the branches of F^-2 from S_k onto the squares W_j of the
branch family at x_k; Q_k the branches of F^-1 from S_(k+1) into S_k. Only
their statistics are carried: the families are far too large to list.
"""
import logging
import math
from typing import Callable, List, Optional

import mpmath
import numpy as np

from distortion import certify_branch_contraction
from errors import PreconditionError
from ifs import BaseScheme, ComposedScheme, SchemeSequence, interleave_schemes, schedule_indices
from logspace import LogValue
from storage.models import ContractionCertificate, ExceptionalSet
from .branches import BranchFamily, branch_squares
from .growth import first_regular_point, growth_exceptional_set
from .models import ClassBModel, ExponentialModel

logger = logging.getLogger(__name__)

MAX_EXP = 700.0


class AffineNormalizer:
    """L(z) = (2/h)(z - center) + 1/2 + i/2, sending S(center, h/4) onto the unit square"""

    def __init__(self, center: complex, h: float):
        if h <= 0:
            raise PreconditionError("h must be positive")
        self.center = complex(center)
        self.h = float(h)

    def __call__(self, z):
        return (2.0 / self.h) * (np.asarray(z, dtype=complex) - self.center) + 0.5 + 0.5j

    def inverse(self, u):
        return self.center + (self.h / 2.0) * (np.asarray(u, dtype=complex) - 0.5 - 0.5j)

    def corners(self) -> np.ndarray:
        q = self.h / 4
        return self.center + np.array([-q - 1j * q, q - 1j * q, -q + 1j * q, q + 1j * q])


class BranchScheme(BaseScheme):
    """
    Statistics of P_k = L_k o P~_k o L_k^-1.

    P~'(w) = phi'(phi(w) + 2 pi i k) phi'(w), and the first factor is
    1/(a + 2 pi i k) up to a relative error rho/(1 - rho), rho = R_x d_k.
    So every branch contracts chords by at least
        b_k = C_b / (2 pi (k + q)),   C_b = b(phi) - rho' c(phi),
    using |a + 2 pi i k| <= 2 pi (k + q). Sums of b_k**s are Hurwitz zeta
    differences, digamma at s = 1.
    """

    def __init__(self, family: BranchFamily, name: str = ""):
        self.family = family
        self.name = name or f"P[x={family.x:g}]"
        self._s = None
        c = family.model.log_lam
        self.certificate: ContractionCertificate = certify_branch_contraction(
            lambda w: np.log(w - c),
            derivative=lambda w: 1.0 / (w - c),
            center=family.center,
            half_side=family.h / 4,
        )
        with mpmath.workdps(family.dps):
            self.d_max = family.d(family.k1 + 1)
            self.d_min = family.d(family.k2 - 1)
            rho = family.R_x * self.d_max
            rho = rho / (1 - rho)
            self.c_b = self.certificate.b_lower - rho * self.certificate.c_upper
            if self.c_b <= 0:
                raise PreconditionError(f"x = {family.x} below threshold: no positive contraction bound")
            a = family._a
            self.q = (abs(a.real) + a.imag) / (2 * mpmath.pi)
            self.c_upper = self.d_max * self.certificate.c_upper * (1 + rho)
            self._log_scale = mpmath.log(self.c_b / (2 * mpmath.pi))
        logger.info(f"{self.name}: C_b = {mpmath.nstr(self.c_b, 8)}, arity ~ e^{self.log_arity:.6g}")

    def power_sum_log(self, s: float) -> float:
        fam = self.family
        with mpmath.workdps(fam.dps):
            lo, hi = fam.k1 + 1 + self.q, fam.k2 + self.q
            if s == 1:
                total = mpmath.digamma(hi) - mpmath.digamma(lo)
            else:
                total = mpmath.zeta(s, lo) - mpmath.zeta(s, hi)
            return float(mpmath.log(fam.n_x) + s * self._log_scale + mpmath.log(total))

    @property
    def log_min_b(self) -> float:
        with mpmath.workdps(self.family.dps):
            return float(self._log_scale - mpmath.log(self.family.k2 - 1 + self.q))

    @property
    def log_max_b(self) -> float:
        with mpmath.workdps(self.family.dps):
            return float(self._log_scale - mpmath.log(self.family.k1 + 1 + self.q))

    @property
    def log_arity(self) -> float:
        fam = self.family
        return math.log(fam.n_x) + float(mpmath.log(fam.k2 - fam.k1 - 1))

    @property
    def log_separation(self) -> float:
        fam = self.family
        with mpmath.workdps(fam.dps):
            two_pi = 2 * mpmath.pi
            d = self.d_max
            # neighbours in k are 2 pi d_(k+1) - 4 pi^2 d_k^2 apart, outer radii 2 d R_x each
            gap = two_pi - two_pi ** 2 * d * (1 + two_pi * d) - 2 * fam.R_x * (2 + two_pi * d)
            if gap <= 0:
                return -math.inf
            return float(mpmath.log(self.d_min * gap * 2 / fam.h))

    @property
    def lower_sum(self) -> float:
        return math.exp(self.log_lower_sum)


class TranslateScheme(BaseScheme):
    """
    Statistics of Q_k = L_k o Q~_k o L_(k+1)^-1, the m_Q translates
    w -> phi(w) + 2 pi i j that carry S_(k+1) into S_k.

    Everything is computed in the scale-free variable u = (w - F(z_x'))/h(x'),
    so x' may be far beyond the float range of e^x'.
    """

    def __init__(self, model: ExponentialModel, x: float, x_next: float, name: str = ""):
        if not x_next > model.xi:
            raise PreconditionError(f"need x_next > xi = {model.xi}")
        self.name = name or f"Q[x={x:g}]"
        self._s = None
        log_abs = math.log(abs(model.lam))
        self.h = math.exp(x) + log_abs
        # h(x')/h'(x') and e^x'/h(x')
        self.R_next = 1 + log_abs * math.exp(-x_next)
        ratio = 1 / self.R_next
        self.x_next = float(x_next)
        quarter = self.h / 4
        if abs(x_next - self.h) + self.R_next > quarter:
            raise PreconditionError(f"phi(S(x_next)) does not fit in S(x) for x = {x}")

        c_im = model.log_lam.imag
        j_lo = math.ceil((c_im - quarter + self.R_next) / (2 * math.pi))
        j_hi = math.floor((c_im + quarter - self.R_next) / (2 * math.pi))
        self.m_q = j_hi - j_lo + 1
        if self.m_q < 1:
            raise PreconditionError(f"no translate of phi(S(x_next)) fits in S(x) for x = {x}")
        self.translates = range(j_lo, j_hi + 1)

        self.certificate = certify_branch_contraction(
            lambda u: np.log(ratio + u),
            derivative=lambda u: 1.0 / (ratio + u),
            center=0j,
            half_side=0.25,
        )
        # Q' = (h(x')/h) phi'(w) = g'(u)/h
        self.b = self.certificate.b_lower / self.h
        self.c = self.certificate.c_upper / self.h
        logger.info(f"{self.name}: m_Q = {self.m_q}, b = {self.b:.6g}")

    def power_sum_log(self, s: float) -> float:
        return math.log(self.m_q) + s * math.log(self.b)

    @property
    def log_min_b(self) -> float:
        return math.log(self.b)

    @property
    def log_max_b(self) -> float:
        return math.log(self.b)

    @property
    def log_arity(self) -> float:
        return math.log(self.m_q)

    @property
    def log_separation(self) -> float:
        gap = 2 * math.pi - 2 * self.R_next
        if self.m_q < 2:
            return 0.0
        return math.log(gap * 2 / self.h) if gap > 0 else -math.inf


class TractSchemes:
    """The scheme pool R_1 = P_1, R_2 = P_1^p o Q_1 with its schedule"""

    def __init__(
        self,
        model: ExponentialModel,
        xs: List[float],
        family: BranchFamily,
        p_scheme: BranchScheme,
        q_scheme: TranslateScheme,
        power: int,
        pool: List[BaseScheme],
        schedule: List[int],
        exceptional: ExceptionalSet,
    ):
        self.model = model
        self.xs = xs
        self.family = family
        self.p_schemes = [p_scheme]
        self.q_schemes = [q_scheme]
        self.powers = [power]
        self.pool = pool
        self.schedule = schedule
        self.sequence = SchemeSequence.from_pool(pool, schedule)
        self.exceptional = exceptional
        self.first_rate_index: Optional[int] = None
        self.normalizers = [AffineNormalizer(family.center, family.h)]
        if xs[1] < MAX_EXP:
            h2 = math.exp(xs[1]) + math.log(abs(model.lam))
            self.normalizers.append(AffineNormalizer(math.exp(xs[1]) + model.log_lam, h2))
        # max Re over S_2 is 5h(x_2)/4; points staying there need ln p_k above it
        self.rate_floor = LogValue.exp(LogValue.exp(xs[1]) * (1.25 * q_scheme.R_next))

    def rate_index(self, p_seq: Callable[[int], float], horizon: int = 10 ** 4) -> Optional[int]:
        """Least n <= horizon with p_n >= exp(5h(x_2)/4)"""
        for n in range(1, horizon + 1):
            if LogValue.coerce(p_seq(n)).approx_ge(self.rate_floor):
                return n
        return None


def _log_h(model: ExponentialModel):
    offset = math.log(abs(model.lam))
    return lambda x: x + np.log1p(offset * np.exp(-x))


def next_abscissa(model: ClassBModel, x: float, delta: float = 0.25, grid_points: int = 256):
    """x' in [h(x), h(x) + 1] outside the exceptional set of h, and that set"""
    if not isinstance(model, ExponentialModel):
        raise PreconditionError("abscissa selection needs the exponential family")
    h = math.exp(x) + math.log(abs(model.lam))
    interval = (h, h + 1.0)
    exceptional = growth_exceptional_set(
        _log_h(model), delta, interval, grid_points, g_prime=lambda t: np.asarray(t, dtype=float), log_form=True
    )
    return first_regular_point(exceptional, interval), exceptional


def build_tract_schemes(
    model: ClassBModel,
    gauge=None,
    p_seq: Optional[Callable[[int], float]] = None,
    x1: float = 6.0,
    delta: float = 0.25,
    samples: int = 16,
    seed: int = 0,
) -> TractSchemes:
    """
    The pool R_1 = P_1, R_2 = P_1^p o Q_1 and its schedule for the gauge.

    Stages beyond Q_1 would need x_3 = h(x_2), out of reach of any
    floating or multiprecision representation, so the last pool stage repeats.
    """
    family = branch_squares(model, x1, samples=samples, seed=seed)
    p1 = BranchScheme(family, name="P1")
    if p1.log_lower_sum <= 0:
        raise PreconditionError(f"x1 = {x1} below threshold: sum of b over P1 is {p1.lower_sum:.6g} <= 1")

    x2, exceptional = next_abscissa(model, x1, delta)
    q1 = TranslateScheme(model, x1, x2, name="Q1")

    power, _ = interleave_schemes(p1, q1)
    # p + 1 keeps sum b(R_2) >= sum b(P_1) > 1
    r2 = ComposedScheme(p1, power + 1, q1, name=f"P1^{power + 1}oQ1")
    pool: List[BaseScheme] = [p1, r2]
    schedule = schedule_indices(pool, gauge)

    result = TractSchemes(model, [x1, x2], family, p1, q1, power + 1, pool, schedule, exceptional)
    if p_seq is not None:
        result.first_rate_index = result.rate_index(p_seq)
    logger.info(f"tract schemes: x = ({x1:g}, {x2:.6g}), power {power + 1}, schedule {schedule}")
    return result
