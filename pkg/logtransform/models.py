"""Class B model functions and their logarithmic transforms"""
import cmath
import logging
import math
from typing import Callable, NamedTuple, Optional

import numpy as np

from errors import PreconditionError
from logspace import LogValue

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
MODULUS_SAMPLES = 1024


class TractGrowth(NamedTuple):
    """h(x) = max Re F on Re z = x, its witness z_x and h'(x)"""
    h: float
    z_x: complex
    h_prime: float
    x_star: float  # h(t) >= 2t for t >= x_star; nan when not determined
    doubles: bool  # h(x) >= 2x


def _numeric_derivative(f: Callable, step: float = 1e-6) -> Callable:
    def derivative(z):
        z = np.asarray(z, dtype=complex)
        return (f(z + step) - f(z - step)) / (2 * step)

    return derivative


class ClassBModel:
    """An entire function f with threshold R such that sing(f^-1) lies in D(0, R)"""

    exact_transform = False

    def __init__(
        self,
        f: Callable[[np.ndarray], np.ndarray],
        fprime: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        R: float = 1.0,
        xi: float = -math.inf,
        name: str = "model",
    ):
        if R <= 0:
            raise PreconditionError("threshold R must be positive")
        self._f = f
        self._fprime = fprime or _numeric_derivative(f)
        self.R = float(R)
        self.xi = float(xi)
        self.name = name

    @property
    def log_R(self) -> float:
        return math.log(self.R)

    def f(self, z):
        return self._f(np.asarray(z, dtype=complex))

    def fprime(self, z):
        return self._fprime(np.asarray(z, dtype=complex))

    def in_tract(self, z) -> np.ndarray:
        """Whether exp(z) lies in G = {|f| > R}"""
        return np.abs(self.f(np.exp(np.asarray(z, dtype=complex)))) > self.R

    def F(self, z):
        """A logarithm of f(exp z); defined up to 2 pi i"""
        return np.log(self.f(np.exp(np.asarray(z, dtype=complex))))

    def F_prime(self, z):
        ez = np.exp(np.asarray(z, dtype=complex))
        return self.fprime(ez) * ez / self.f(ez)

    def branch(self, w, k: int = 0):
        raise PreconditionError(f"{self.name} has no closed-form inverse branch of F")

    def branch_derivative(self, w):
        raise PreconditionError(f"{self.name} has no closed-form inverse branch of F")

    def max_modulus(self, r: float) -> float:
        """Sampled M(r) = max |f| on |z| = r"""
        theta = np.linspace(0.0, TWO_PI, MODULUS_SAMPLES, endpoint=False)
        return float(np.max(np.abs(self.f(r * np.exp(1j * theta)))))

    def max_modulus_log(self, r: LogValue) -> LogValue:
        return LogValue.from_float(self.max_modulus(r.to_float()))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, R={self.R})"


class ExponentialModel(ClassBModel):
    """f(z) = lambda e^z with F(z) = e^z + Log lambda"""

    exact_transform = True

    def __init__(self, lam: complex, R: Optional[float] = None):
        lam = complex(lam)
        if lam == 0:
            raise PreconditionError("lambda must be nonzero")
        R = abs(lam) + 1.0 if R is None else float(R)
        if R < abs(lam):
            raise PreconditionError(f"need R >= |lambda| = {abs(lam)}, got {R}")
        if R == abs(lam):
            logger.warning("R = |lambda|: the tract reaches down to Re z = -inf")
        self.lam = lam
        self.log_lam = cmath.log(lam)
        gap = math.log(R / abs(lam))
        xi = math.log(gap) if gap > 0 else -math.inf
        super().__init__(self._eval, self._eval, R=R, xi=xi, name=f"{lam:g}*exp")

    def _eval(self, z):
        return self.lam * np.exp(z)

    def in_tract(self, z) -> np.ndarray:
        # |lambda e^{e^z}| > R  <=>  Re e^z > ln(R/|lambda|)
        return np.exp(np.asarray(z, dtype=complex)).real > math.log(self.R / abs(self.lam))

    def F(self, z):
        return np.exp(np.asarray(z, dtype=complex)) + self.log_lam

    def F_prime(self, z):
        return np.exp(np.asarray(z, dtype=complex))

    def branch(self, w, k: int = 0):
        """phi_k(w) = Log(w - Log lambda) + 2 pi i k"""
        return np.log(np.asarray(w, dtype=complex) - self.log_lam) + 2j * math.pi * k

    def branch_derivative(self, w):
        return 1.0 / (np.asarray(w, dtype=complex) - self.log_lam)

    def max_modulus(self, r: float) -> float:
        return abs(self.lam) * math.exp(r)

    def max_modulus_log(self, r: LogValue) -> LogValue:
        return LogValue.exp(r) * abs(self.lam)


class ContourModel(ClassBModel):
    """Wraps a function built from a strip profile by a contour integral"""

    def __init__(self, function, R: float = 1.0, xi: float = -math.inf):
        derivative = getattr(function, "derivative", None)
        super().__init__(function, derivative, R=R, xi=xi, name="contour")
        self.function = function
