"""
Strip profiles: the half-width phi of S = {x + iy: x > 0, |y| < phi(x)}.

A profile is decreasing on [x0, inf) and constant to the left of x0.
Built profiles follow the recursion phi(sigma(x)) = beta(phi(x)) with
sigma(x) = x + alpha(x), phi(x0) = 1 and linear interpolation on
[x0, sigma(x0)].
"""
import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import config
from errors import NumericFailure, PreconditionError

logger = logging.getLogger(__name__)

INVERSE_TABLE = 20  # table points per profile grid point for sigma^-1


class StripProfile:
    """Base profile; subclasses supply `_eval` on x >= x0"""

    x0: float = 0.0
    L: float = 1.0
    breakpoints: np.ndarray = np.array([])
    name: str = "profile"

    def _eval(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        clipped = np.maximum(x, self.x0)
        return self._eval(clipped)

    def derivative(self, x, step: float = 1e-7):
        x = np.asarray(x, dtype=float)
        return (self(x + step) - self(x - step)) / (2 * step)

    def is_decreasing(self, grid: np.ndarray) -> bool:
        values = self(np.sort(grid))
        return bool(np.all(np.diff(values) <= 1e-15 * np.maximum(1.0, values[:-1])))

    def to_frame(self, xs: Optional[np.ndarray] = None) -> pd.DataFrame:
        """(x, phi) rows; breakpoints by default"""
        xs = self.breakpoints if xs is None else np.asarray(xs, dtype=float)
        return pd.DataFrame({"x": xs, "phi": self(xs)})

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, x0={self.x0})"


class FunctionProfile(StripProfile):
    """A closed-form profile"""

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        x0: float = 0.0,
        breakpoints: Sequence[float] = (),
        name: str = "function",
    ):
        self.fn = fn
        self.x0 = float(x0)
        self.L = float(fn(np.asarray(self.x0)))
        if not self.L > 0:
            raise PreconditionError("profile must be positive at x0")
        self.breakpoints = np.asarray(sorted({self.x0, *breakpoints}), dtype=float)
        self.name = name

    def _eval(self, x):
        return np.asarray(self.fn(x), dtype=float)

    @classmethod
    def constant(cls, c: float, x0: float = 0.0) -> "FunctionProfile":
        if c <= 0:
            raise PreconditionError("width must be positive")
        return cls(lambda x: np.full(np.shape(x), float(c)), x0, name=f"const {c:g}")

    @classmethod
    def reciprocal(cls, x0: float = 1.0) -> "FunctionProfile":
        """phi(x) = 1/x for x >= x0"""
        if x0 <= 0:
            raise PreconditionError("1/x needs x0 > 0")
        return cls(lambda x: 1.0 / x, x0, name="1/x")

    @classmethod
    def capped_reciprocal(cls) -> "FunctionProfile":
        """phi(x) = min(1, 1/x)"""
        return cls(lambda x: np.minimum(1.0, 1.0 / np.maximum(x, 1e-300)), 0.0, breakpoints=[1.0], name="min(1,1/x)")


class RecursiveProfile(StripProfile):
    """
    The profile of the recursion phi(sigma^k(x)) = beta^k(phi(x)).

    Points are pulled back to the base interval [x0, sigma(x0)] through a
    monotone table of sigma, so evaluation is vectorized; orbit points are
    returned exactly.
    """

    def __init__(self, sigma: Callable, beta: Callable, x0: float, x_max: float, name: str = "recursive"):
        if x_max < x0:
            raise PreconditionError(f"x_max = {x_max} < x0 = {x0}")
        self.sigma = sigma
        self.beta = beta
        self.x0 = float(x0)
        self.name = name
        self.L = 1.0

        orbit = [self.x0]
        while orbit[-1] <= x_max:
            nxt = float(sigma(np.asarray(orbit[-1])))
            if not nxt > orbit[-1]:
                raise NumericFailure(f"sigma does not increase at x = {orbit[-1]}")
            orbit.append(nxt)
            if len(orbit) > config.PROFILE_ORBIT_CAP:
                raise NumericFailure(f"sigma-orbit longer than {config.PROFILE_ORBIT_CAP} before x_max")
        self.orbit = np.asarray(orbit)
        self.breakpoints = self.orbit
        self.orbit_values = self._orbit_values()

        table = np.linspace(self.x0, self.orbit[-2], config.PROFILE_GRID * INVERSE_TABLE)
        self._u_table = table
        self._sigma_table = np.asarray(sigma(table), dtype=float)
        if np.any(np.diff(self._sigma_table) <= 0):
            raise NumericFailure("sigma is not strictly increasing on the table")
        self._sigma_slope = np.gradient(self._sigma_table, table)
        logger.info(f"{name}: {len(self.orbit)} orbit points up to x = {self.orbit[-1]:.6g}")

    def _orbit_values(self):
        values = [1.0]
        for _ in range(len(self.orbit) - 1):
            values.append(float(self.beta(np.asarray(values[-1]))))
        return np.asarray(values)

    @property
    def x_end(self) -> float:
        return float(self.orbit[-1])

    def pull_back(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(k, y) with sigma^k(y) = x and y in [x0, sigma(x0)]"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x > self.x_end):
            raise PreconditionError(f"profile evaluated beyond its orbit end {self.x_end}")
        k = np.searchsorted(self.orbit, x, side="right") - 1
        k = np.minimum(np.maximum(k, 0), len(self.orbit) - 2)
        y = x.copy()
        for step in range(int(k.max()) if k.size else 0):
            active = k > step
            target = y[active]
            guess = np.interp(target, self._sigma_table, self._u_table)
            for _ in range(2):
                slope = np.interp(guess, self._u_table, self._sigma_slope)
                guess = guess - (np.asarray(self.sigma(guess), dtype=float) - target) / slope
            y[active] = guess
        low, high = self.orbit[0], self.orbit[1]
        return k, np.clip(y, low, high)

    def _base(self, y: np.ndarray) -> np.ndarray:
        slope = (self.orbit_values[1] - 1.0) / (self.orbit[1] - self.orbit[0])
        return 1.0 + slope * (y - self.orbit[0])

    def _eval(self, x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        flat = x.ravel()
        k, y = self.pull_back(flat)
        t = self._base(y)
        for step in range(int(k.max()) if k.size else 0):
            active = k > step
            t[active] = np.asarray(self.beta(t[active]), dtype=float)
        exact = np.searchsorted(self.orbit, flat)
        hit = (exact < len(self.orbit)) & (self.orbit[np.minimum(exact, len(self.orbit) - 1)] == flat)
        t[hit] = self.orbit_values[exact[hit]]
        return t.reshape(shape)


def regularize_alpha(alpha: Callable, x0: float, x_max: float) -> Callable:
    """
    alpha* <= alpha with sigma*(x) = x + alpha*(x) strictly increasing.

    alpha itself when x + alpha(x) already increases on the grid; otherwise
    half the gap to the running minimum of sigma from the right.
    """
    grid = np.linspace(x0, x_max, config.PROFILE_GRID)
    sigma = grid + np.asarray(alpha(grid), dtype=float)
    if np.any(np.asarray(alpha(grid)) <= 0):
        raise PreconditionError("alpha must be positive")
    if np.all(np.diff(sigma) > 0):
        return alpha
    logger.warning("x + alpha(x) is not increasing; using a regularized alpha")
    floor = np.minimum.accumulate(sigma[::-1])[::-1]
    gap = 0.5 * (floor - grid)

    def alpha_star(x):
        x = np.asarray(x, dtype=float)
        inside = np.interp(x, grid, gap)
        return np.where(x > x_max, np.minimum(np.asarray(alpha(x), dtype=float), gap[-1]), inside)

    return alpha_star


def build_phi(alpha: Callable, beta: Callable, x0: float, x_max: float) -> RecursiveProfile:
    """Decreasing phi on [x0, x_max] with phi(x + alpha*(x)) = beta*(phi(x))"""
    if x_max < x0:
        raise PreconditionError(f"x_max = {x_max} < x0 = {x0}")
    alpha_star = regularize_alpha(alpha, x0, x_max)

    def sigma(x):
        x = np.asarray(x, dtype=float)
        return x + np.asarray(alpha_star(x), dtype=float)

    def beta_star(t):
        t = np.asarray(t, dtype=float)
        return np.minimum(np.asarray(beta(t), dtype=float), t / 2)

    return RecursiveProfile(sigma, beta_star, x0, x_max)


def check_recursion(profile: RecursiveProfile, grid: np.ndarray, rtol: float = 1e-6):
    """Largest phi(sigma(x)) / beta(phi(x)) over the grid, and whether it is <= 1 + rtol"""
    grid = np.asarray(grid, dtype=float)
    grid = grid[profile.sigma(grid) <= profile.x_end]
    lhs = profile(profile.sigma(grid))
    rhs = np.asarray(profile.beta(profile(grid)), dtype=float)
    ratio = float(np.max(lhs / rhs))
    return ratio, ratio <= 1 + rtol
