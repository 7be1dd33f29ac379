"""Gauge functions h with regularization, doubling constants and log-space evaluation"""
import logging
import math
from typing import Callable, Optional, Union

import numpy as np
from scipy import optimize

import config
from errors import PreconditionError
from logspace import LogValue

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


class GaugeFactor:
    """g(t) = linear*t + c*t**a, evaluable and invertible in log space"""

    def __init__(self, c: float = 1.0, a: float = 1.0, linear: float = 0.0):
        if c <= 0 or a <= 0 or linear < 0:
            raise PreconditionError("gauge factor needs c > 0, a > 0, linear >= 0")
        self.c = float(c)
        self.a = float(a)
        self.linear = float(linear)

    def __call__(self, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        return self.linear * t + self.c * np.power(t, self.a)

    def with_linear(self, extra: float) -> "GaugeFactor":
        return GaugeFactor(self.c, self.a, self.linear + extra)

    def eval_log(self, t: LogValue) -> LogValue:
        value = (t ** self.a) * self.c
        if self.linear > 0:
            value = value + t * self.linear
        return value

    def inverse_log(self, y: LogValue) -> LogValue:
        """The t with g(t) = y"""
        if y.is_zero():
            return y
        if self.linear == 0:
            return (y / self.c) ** (1.0 / self.a)
        if self.a == 1.0:
            return y / (self.linear + self.c)
        if y.depth == 0:
            return LogValue.from_log(self._solve_log(y.level))
        # out of float range one term dominates
        small = y.sign < 0
        if (self.a > 1) == small:
            return y / self.linear
        return (y / self.c) ** (1.0 / self.a)

    def inverse(self, y: float) -> float:
        return self.inverse_log(LogValue.from_float(y)).to_float()

    def _solve_log(self, log_y: float) -> float:
        log_c = math.log(self.c)
        log_lin = math.log(self.linear)

        def gap(u: float) -> float:
            return float(np.logaddexp(log_lin + u, log_c + self.a * u)) - log_y

        hi = min(log_y - log_lin, (log_y - log_c) / self.a)
        lo = min(log_y - log_lin, (log_y - log_c) / self.a) - math.log(2.0) * max(1.0, 1.0 / self.a)
        while gap(lo) > 0:
            lo -= max(1.0, abs(lo))
        return optimize.brentq(gap, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)

    def __repr__(self) -> str:
        return f"GaugeFactor(c={self.c}, a={self.a}, linear={self.linear})"


class GaugeFn:
    """
    A gauge function h on [0, eta).

    Forms:
      power     h(t) = t**s
      exponent  h(t) = t**(1 + eps(t))
      product   h(t) = t * g(t)
    """

    def __init__(
        self,
        form: str,
        eta: Optional[float] = None,
        power: Optional[float] = None,
        exponent: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        factor: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        grid: Optional[np.ndarray] = None,
    ):
        if form not in ("power", "exponent", "product"):
            raise PreconditionError(f"unknown gauge form: {form}")
        self.form = form
        self.eta = float(eta if eta is not None else config.GAUGE_ETA)
        self.power = power
        self.eps = exponent
        self.factor = factor
        self.grid = grid

    @classmethod
    def power_law(cls, s: float, eta: Optional[float] = None) -> "GaugeFn":
        if s <= 0:
            raise PreconditionError("power gauge needs s > 0")
        return cls("power", eta=eta, power=float(s))

    @classmethod
    def exponent_form(cls, eps: Callable, eta: Optional[float] = None) -> "GaugeFn":
        return cls("exponent", eta=eta, exponent=eps)

    @classmethod
    def product_form(cls, g: Callable, eta: Optional[float] = None) -> "GaugeFn":
        return cls("product", eta=eta, factor=g)

    # -- evaluation ---------------------------------------------------

    def __call__(self, t: ArrayLike) -> ArrayLike:
        t_arr = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.form == "power":
                value = np.power(t_arr, self.power)
            elif self.form == "exponent":
                value = np.power(t_arr, 1.0 + np.asarray(self.eps(t_arr), dtype=float))
            else:
                value = t_arr * np.asarray(self.factor(t_arr), dtype=float)
        value = np.where(t_arr > 0, value, 0.0)
        return float(value) if np.ndim(t) == 0 else value

    def log_eval(self, t: ArrayLike) -> np.ndarray:
        """ln h(t) for t > 0, computed without forming h"""
        t_arr = np.asarray(t, dtype=float)
        log_t = np.log(t_arr)
        with np.errstate(divide="ignore"):
            if self.form == "power":
                return self.power * log_t
            if self.form == "exponent":
                return (1.0 + np.asarray(self.eps(t_arr), dtype=float)) * log_t
            return log_t + np.log(np.asarray(self.factor(t_arr), dtype=float))

    def factor_values(self, t: ArrayLike) -> np.ndarray:
        """g(t) = h(t)/t"""
        t_arr = np.asarray(t, dtype=float)
        if self.form == "power":
            return np.power(t_arr, self.power - 1.0)
        if self.form == "exponent":
            return np.power(t_arr, np.asarray(self.eps(t_arr), dtype=float))
        return np.asarray(self.factor(t_arr), dtype=float)

    def eval_log_value(self, t: LogValue) -> LogValue:
        """h(t) for a LogValue argument"""
        if self.form == "power":
            return t ** self.power
        if self.form == "product" and isinstance(self.factor, GaugeFactor):
            return t * self.factor.eval_log(t)
        raise PreconditionError("log-space evaluation needs a power gauge or a GaugeFactor product")

    def default_grid(self, t_max: Optional[float] = None) -> np.ndarray:
        upper = t_max if t_max is not None else self.eta * (1 - 1e-9)
        return np.geomspace(config.GRID_MIN * self.eta, upper, config.GRID_POINTS)

    def _check_grid(self, grid: Optional[np.ndarray]) -> np.ndarray:
        if grid is None:
            grid = self.default_grid()
        grid = np.asarray(grid, dtype=float)
        if grid.size == 0:
            raise PreconditionError("grid is empty")
        if np.any(np.diff(grid) <= 0):
            raise PreconditionError("grid must be strictly increasing")
        if grid[0] <= 0 or grid[-1] >= self.eta:
            raise PreconditionError(f"grid must lie in (0, {self.eta})")
        return grid

    # -- regularization -----------------------------------------------

    def regularize_exponent(self, grid: Optional[np.ndarray] = None) -> "GaugeFn":
        """eps*(t) = max of eps over grid points <= t"""
        if self.form != "exponent":
            raise PreconditionError("regularize_exponent needs an exponent gauge")
        grid = self._check_grid(grid)
        eps_grid = np.asarray(self.eps(grid), dtype=float)
        if np.any(eps_grid < 0) or not np.all(np.isfinite(eps_grid)):
            raise PreconditionError("exponent must be finite and nonnegative on the grid")
        running = np.maximum.accumulate(eps_grid)
        return GaugeFn("exponent", eta=self.eta, exponent=_step_lookup(grid, running), grid=grid)

    def regularize_product(self, grid: Optional[np.ndarray] = None) -> "GaugeFn":
        """g*(t) = t + sup of g over grid points <= t"""
        if self.form != "product":
            raise PreconditionError("regularize_product needs a product gauge")
        grid = self._check_grid(grid)
        g_grid = np.asarray(self.factor(grid), dtype=float)
        if np.any(g_grid < 0) or not np.all(np.isfinite(g_grid)):
            raise PreconditionError("gauge factor must be finite and nonnegative on the grid")
        if isinstance(self.factor, GaugeFactor):
            # already nondecreasing, so the running sup is g itself
            return GaugeFn("product", eta=self.eta, factor=self.factor.with_linear(1.0), grid=grid)
        running = np.maximum.accumulate(g_grid)
        lookup = _step_lookup(grid, running)

        def regularized(t):
            return np.asarray(t, dtype=float) + lookup(t)

        return GaugeFn("product", eta=self.eta, factor=regularized, grid=grid)

    # -- predicates ---------------------------------------------------

    def doubling_constant(self, t_max: float, grid: Optional[np.ndarray] = None) -> float:
        """Smallest sampled K with h(2t) <= K h(t) for grid t <= t_max"""
        if not 2 * t_max < self.eta:
            raise PreconditionError(f"need 2*t_max < eta, got t_max={t_max}")
        if grid is None:
            grid = self.default_grid(t_max)
        grid = np.asarray(grid, dtype=float)
        grid = grid[(grid > 0) & (grid <= t_max)]
        if grid.size == 0:
            raise PreconditionError("no grid points below t_max")
        log_h = self.log_eval(grid)
        if np.any(~np.isfinite(log_h)):
            raise PreconditionError("h vanishes or diverges at a positive grid point")
        ratios = np.exp(self.log_eval(2 * grid) - log_h)
        return float(np.max(ratios))

    def is_nondecreasing(self, grid: Optional[np.ndarray] = None) -> bool:
        grid = self._check_grid(grid)
        values = self(grid)
        return bool(np.all(np.diff(values) >= -1e-15 * np.abs(values[1:])))

    def vanishing_g(self, grid: Optional[np.ndarray] = None) -> bool:
        """Whether g = h/t is nondecreasing and tends to 0 along the grid"""
        grid = self._check_grid(grid)
        g_values = self.factor_values(grid)
        if not np.all(np.isfinite(g_values)):
            return False
        monotone = np.all(np.diff(g_values) >= -1e-12 * np.abs(g_values[1:]))
        return bool(monotone and g_values[0] <= config.VANISHING_TOL * max(g_values[-1], 1e-300))

    def dominates(self, other: "GaugeFn", grid: Optional[np.ndarray] = None) -> bool:
        """self(t) >= other(t) at every grid point"""
        grid = self._check_grid(grid)
        return bool(np.all(self.log_eval(grid) >= other.log_eval(grid) - 1e-12))

    def __repr__(self) -> str:
        return f"GaugeFn(form={self.form}, eta={self.eta})"


def _step_lookup(grid: np.ndarray, values: np.ndarray) -> Callable[[ArrayLike], np.ndarray]:
    """Right-continuous step function through (grid, values)"""

    def lookup(t):
        idx = np.searchsorted(grid, np.asarray(t, dtype=float), side="right") - 1
        return values[np.clip(idx, 0, len(values) - 1)]

    return lookup
