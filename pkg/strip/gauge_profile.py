"""
The strip profile for a gauge h(t) = t g(t).

phi is built from alpha(p_(n-1)) = 1/n^2 (linear in between) and
beta = g^-1 o tau, so that g(phi(x + 1/n^2)) <= tau(phi(x)) for x >= p_(n-1).
Beyond the first orbit step phi is far below the float range; every value
is a LogValue.
"""
import logging
import math
from typing import Callable, List, Union

import numpy as np
from scipy import optimize

from errors import NumericFailure, PreconditionError
from gauge import GaugeFactor, GaugeFn
from logspace import LogValue
from storage.models import BoundReport
from .profile import RecursiveProfile

logger = logging.getLogger(__name__)

LN4 = math.log(4.0)
CHAIN_RTOL = 1e-9


def tau(t: Union[float, LogValue]) -> LogValue:
    """((t/4) exp(-exp(t^-5)))^(1/t), through |ln tau| = (exp(t^-5) + ln(4/t)) / t"""
    if not isinstance(t, LogValue) and not 0 < t <= 1:
        raise PreconditionError(f"tau needs t in (0, 1], got {t}")
    t = LogValue.coerce(t)
    if t.is_zero() or t.log_sign() > 0:
        raise PreconditionError(f"tau needs t in (0, 1], got {t!r}")
    magnitude = (LogValue.exp(t.reciprocal() ** 5) + (t.mag() + LN4)) / t
    return LogValue.pack(-1, magnitude)


def tau_is_increasing(grid: np.ndarray) -> bool:
    values = [tau(float(t)) for t in np.sort(grid)]
    return all(a <= b for a, b in zip(values, values[1:]))


class _SampledFactor:
    """A float-only g, inverted by bisection in ln t"""

    def __init__(self, g: Callable):
        self.g = g

    def eval_log(self, t: LogValue) -> LogValue:
        if t.depth > 0:
            raise PreconditionError("g has no log-space form; cannot evaluate below the float range")
        return LogValue.from_float(float(self.g(t.to_float())))

    def inverse_log(self, y: LogValue) -> LogValue:
        target = y.to_float()
        if target == 0.0 or y.depth > 0:
            raise PreconditionError("g not invertible on the needed range: value below float range")

        def gap(u: float) -> float:
            return float(self.g(math.exp(u))) - target

        lo, hi = math.log(target) - 1.0, 0.0
        while gap(lo) > 0:
            lo -= max(1.0, abs(lo))
            if lo < -700:
                raise PreconditionError("g not invertible on the needed range")
        if gap(hi) < 0:
            raise PreconditionError("g not invertible on the needed range: g(1) below target")
        return LogValue.from_log(optimize.brentq(gap, lo, hi, xtol=1e-14))


def gauge_factor(g) -> Union[GaugeFactor, _SampledFactor]:
    """The factor g of a product gauge, with log-space evaluation and inverse"""
    if isinstance(g, GaugeFn):
        if g.form != "product":
            raise PreconditionError("profile construction needs a product gauge t g(t)")
        g = g.factor
    if isinstance(g, GaugeFactor):
        return g
    if callable(g):
        return _SampledFactor(g)
    raise PreconditionError(f"not a gauge factor: {g!r}")


class GaugeProfile(RecursiveProfile):
    """phi with phi(sigma(x)) = min(g^-1(tau(phi(x))), phi(x)/2)"""

    def __init__(self, g, p_seq: Callable[[int], float], n_max: int = 8):
        if n_max < 2:
            raise PreconditionError("n_max must be at least 2")
        self.factor = gauge_factor(g)
        self.n_max = n_max
        self.p = np.array([float(p_seq(n)) for n in range(1, n_max + 3)])
        if np.any(np.diff(self.p) <= 0):
            raise PreconditionError("rate sequence must be strictly increasing")
        self._check_regularized()

        # knot p_n carries alpha = 1/(n+1)^2
        knots = self.p
        alphas = 1.0 / np.arange(2, n_max + 4) ** 2

        def alpha(x):
            return np.interp(np.asarray(x, dtype=float), knots, alphas)

        def sigma(x):
            x = np.asarray(x, dtype=float)
            return x + alpha(x)

        self.alpha = alpha
        super().__init__(sigma, self.beta_log, self.p[0], self.p[n_max], name=f"gauge profile n<={n_max}")
        if not tau_is_increasing(np.linspace(1e-3, 1.0, 1000)):
            raise NumericFailure("tau is not increasing on the working grid")

    def p_n(self, n: int) -> float:
        return float(self.p[n - 1])

    def _check_regularized(self, grid_points: int = 64):
        for t in np.geomspace(1e-12, 1.0, grid_points):
            t_log = LogValue.from_float(float(t))
            if not self.factor.eval_log(t_log).approx_ge(t_log, 1e-12):
                raise PreconditionError(f"g(t) < t at t = {t:.3g}; regularize the gauge first")

    def beta_log(self, t: LogValue) -> LogValue:
        t = LogValue.coerce(t)
        return min(self.factor.inverse_log(tau(t)), t * 0.5)

    def _orbit_values(self) -> List[LogValue]:
        values = [LogValue.one()]
        for _ in range(len(self.orbit) - 1):
            values.append(self.beta_log(values[-1]))
        return values

    def value_log(self, x: float) -> LogValue:
        """phi(x) as a LogValue"""
        x = max(float(x), self.x0)
        hit = np.searchsorted(self.orbit, x)
        if hit < len(self.orbit) and self.orbit[hit] == x:
            return self.orbit_values[hit]
        k, y = self.pull_back(np.array([x]))
        v1 = self.orbit_values[1].to_float()
        slope = (v1 - 1.0) / (self.orbit[1] - self.orbit[0])
        t = LogValue.from_float(1.0 + slope * (float(y[0]) - self.orbit[0]))
        for _ in range(int(k[0])):
            t = self.beta_log(t)
        return t

    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        return np.vectorize(lambda v: self.value_log(v).to_float(), otypes=[float])(x)

    def to_frame(self, xs=None):
        frame = super().to_frame(xs)
        logs = [self.value_log(x) for x in frame["x"]]
        frame["log_sign"] = [v.sign for v in logs]
        frame["log_depth"] = [v.depth for v in logs]
        frame["log_level"] = [v.level for v in logs]
        return frame

    # -- checks ------------------------------------------------------------

    def chain_samples(self, n: int) -> List[float]:
        """Knots p_(n-1), ..., p_(n_max) and the midpoints between them"""
        knots = self.p[n - 2:self.n_max]
        return sorted(np.concatenate([knots, 0.5 * (knots[:-1] + knots[1:])]).tolist())

    def check_chain(self, n: int, xs=None) -> BoundReport:
        """
        g(phi(x + 1/n^2)) <= tau(phi(x)) at sampled x >= p_(n-1).

        phi decreases and sigma(x) <= x + 1/n^2 there, so the left side is at
        most g(phi(sigma(x))) = g(beta(phi(x))), read off the same tower as
        the right side.
        """
        if not 2 <= n <= self.n_max:
            raise PreconditionError(f"n must be in [2, {self.n_max}]")
        step = 1.0 / n ** 2
        floor = self.p_n(n - 1)
        xs = self.chain_samples(n) if xs is None else xs
        xs = [float(x) for x in xs if floor <= x and x + step <= self.x_end]
        worst, witness, ok = 0.0, None, True
        for x in xs:
            t = self.value_log(x)
            if float(self.sigma(np.asarray(x))) <= x + step * (1 + 1e-12):
                lhs = self.factor.eval_log(self.beta_log(t))
            else:
                lhs = self.factor.eval_log(self.value_log(x + step))
            rhs = tau(t)
            holds = lhs.approx_le(rhs, CHAIN_RTOL)
            ratio = (lhs / rhs).to_float()
            if not holds and ok:
                ok, witness = False, f"x={x!r}"
            worst = max(worst, ratio)
        return BoundReport(name=f"chain_n{n}", ok=ok, samples=len(xs), max_slack=worst, witness=witness)

    def check_monotone(self) -> BoundReport:
        """phi > 0 and decreasing along its orbit and on the chain samples"""
        xs = sorted(set(self.orbit[:-1].tolist()) | set(self.chain_samples(2)))
        values = [self.value_log(x) for x in xs]
        ok, witness = True, None
        for x, left, right in zip(xs[1:], values, values[1:]):
            if right.is_zero() or not right.approx_le(left, CHAIN_RTOL):
                ok, witness = False, f"x={x!r}"
                break
        return BoundReport(name="monotone", ok=ok, samples=len(xs), max_slack=0.0 if ok else math.inf,
                           witness=witness)

    def check_decay(self) -> BoundReport:
        """phi(p_n) <= 4^-n for 2 <= n <= n_max"""
        worst, witness, ok = 0.0, None, True
        for n in range(2, self.n_max + 1):
            value = self.value_log(self.p_n(n))
            bound = LogValue.from_log(-n * LN4)
            if not value.approx_le(bound, CHAIN_RTOL):
                ok, witness = False, f"n={n}"
            worst = max(worst, (value / bound).to_float())
        return BoundReport(name="decay_4n", ok=ok, samples=self.n_max - 1, max_slack=worst, witness=witness)

    def check_inverse_square(self, span: float = 100.0, grid_points: int = 64) -> BoundReport:
        """
        phi(x) <= 1/x^2 on [max(p_1, 1), p_1 + span].

        On an orbit interval [x_k, x_(k+1)] phi <= phi(x_k) and 1/x^2 >= 1/x_(k+1)^2;
        intervals where that bound is too coarse are sampled.
        """
        lo, hi = max(self.x0, 1.0), self.x0 + span
        worst, witness, checks = 0.0, None, 0
        end_bound = LogValue.from_float(1.0 / hi ** 2)
        for k in range(len(self.orbit)):
            left = self.orbit[k]
            right = self.orbit[k + 1] if k + 1 < len(self.orbit) else hi
            if right < lo:
                continue
            if left > hi:
                break
            value = self.orbit_values[k]
            if value.approx_le(end_bound):
                checks += 1
                break
            bound = LogValue.from_float(1.0 / min(right, hi) ** 2)
            checks += 1
            if value.approx_le(bound):
                continue
            for x in np.linspace(max(left, lo), min(right, hi, self.x_end), grid_points):
                ratio = self.value_log(x).to_float() * x ** 2
                checks += 1
                if ratio > worst:
                    worst, witness = ratio, f"x={x!r}"
        else:
            if not self.orbit_values[-1].approx_le(end_bound):
                return BoundReport(name="inverse_square", ok=False, samples=checks, max_slack=math.inf,
                                   witness="orbit ends before phi drops below 1/x^2")
        return BoundReport(name="inverse_square", ok=worst <= 1, samples=checks, max_slack=worst, witness=witness)

    def verify(self) -> List[BoundReport]:
        reports = [self.check_monotone()]
        reports += [self.check_chain(n) for n in range(2, self.n_max + 1)]
        reports += [self.check_decay(), self.check_inverse_square()]
        for report in reports:
            logger.info(f"{report.name}: ok={report.ok} over {report.samples} samples")
        return reports


def build_phi_for_gauge(g, p_seq: Callable[[int], float], n_max: int = 8) -> GaugeProfile:
    """The profile for gauge factor g and a normalized rate sequence, verified"""
    profile = GaugeProfile(g, p_seq, n_max)
    failed = [r.name for r in profile.verify() if not r.ok]
    if failed:
        raise NumericFailure(f"gauge profile checks failed: {', '.join(failed)}")
    return profile
