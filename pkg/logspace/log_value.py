"""Level-index numbers for quantities far outside the float range"""
import math
from functools import total_ordering
from typing import Tuple, Union

import numpy as np

BIG = 1e300
LN_BIG = math.log(BIG)

Number = Union[int, float, "LogValue"]


@total_ordering
class LogValue:
    """
    A nonnegative real stored through its logarithm.

    depth 0:  ln x = level, |level| < BIG (zero is level = -inf)
    depth d:  ln x = sign * E_d(level) with E_1 = exp, E_d = exp o E_{d-1},
              LN_BIG <= level < BIG

    Products, quotients and powers are exact up to float rounding at the
    lowest level that still carries information. Sums of values that are
    out of float range keep the dominant term.
    """

    __slots__ = ("sign", "depth", "level")

    def __init__(self, sign: int, depth: int, level: float):
        self.sign = 1 if sign >= 0 else -1
        self.depth = depth
        self.level = float(level)

    # -- construction -------------------------------------------------

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(1, 0, -math.inf)

    @classmethod
    def one(cls) -> "LogValue":
        return cls(1, 0, 0.0)

    @classmethod
    def from_log(cls, log_value: float) -> "LogValue":
        """Value whose natural logarithm is `log_value`"""
        if math.isnan(log_value):
            raise ValueError("logarithm is NaN")
        if log_value == -math.inf:
            return cls.zero()
        if math.isinf(log_value):
            raise OverflowError("logarithm is +inf")
        if abs(log_value) < BIG:
            return cls(1, 0, log_value)
        return cls(1 if log_value > 0 else -1, 1, math.log(abs(log_value)))

    @classmethod
    def from_float(cls, value: float) -> "LogValue":
        if value < 0 or math.isnan(value):
            raise ValueError(f"LogValue needs a nonnegative number, got {value}")
        if value == 0:
            return cls.zero()
        if math.isinf(value):
            raise OverflowError("value is +inf")
        return cls(1, 0, math.log(value))

    @classmethod
    def coerce(cls, value: Number) -> "LogValue":
        if isinstance(value, LogValue):
            return value
        return cls.from_float(float(value))

    @classmethod
    def exp(cls, value: Number) -> "LogValue":
        """e**value for a real float or a nonnegative LogValue"""
        if isinstance(value, LogValue):
            return cls.pack(1, value)
        return cls.from_log(float(value))

    @classmethod
    def pack(cls, sign: int, magnitude: "LogValue") -> "LogValue":
        """exp(sign * magnitude); inverse of `mag`"""
        if magnitude.is_zero():
            return cls.one()
        if magnitude.depth == 0:
            if magnitude.level < LN_BIG:
                return cls(1, 0, sign * math.exp(magnitude.level))
            return cls(sign, 1, magnitude.level)
        if magnitude.sign > 0:
            return cls(sign, magnitude.depth + 1, magnitude.level)
        # magnitude below exp(-BIG): exp of it is 1 in every representable digit
        return cls.one()

    # -- inspection ---------------------------------------------------

    def is_zero(self) -> bool:
        return self.depth == 0 and self.level == -math.inf

    def mag(self) -> "LogValue":
        """|ln x| as a LogValue"""
        if self.is_zero():
            raise OverflowError("|ln 0| is infinite")
        if self.depth == 0:
            return LogValue.from_float(abs(self.level))
        if self.depth == 1:
            return LogValue(1, 0, self.level)
        return LogValue(1, self.depth - 1, self.level)

    def log(self) -> float:
        """ln x as a float (may be +-inf for towers)"""
        if self.depth == 0:
            return self.level
        return self.sign * math.inf

    def log_sign(self) -> int:
        if self.depth == 0:
            return 0 if self.level == 0 else (1 if self.level > 0 else -1)
        return self.sign

    def to_float(self) -> float:
        if self.depth == 0:
            if self.level > 709.78:
                return math.inf
            return math.exp(self.level)
        return math.inf if self.sign > 0 else 0.0

    def __float__(self) -> float:
        return self.to_float()

    def key(self) -> Tuple[float, float]:
        """Order-preserving key"""
        if self.is_zero():
            return (-math.inf, 0.0)
        if self.depth == 0:
            return (0.0, self.level)
        return (float(self.sign * self.depth), self.sign * self.level)

    # -- comparison ---------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, (LogValue, int, float)):
            return NotImplemented
        return self.key() == LogValue.coerce(other).key()

    def __lt__(self, other: Number) -> bool:
        return self.key() < LogValue.coerce(other).key()

    def __hash__(self) -> int:
        return hash(self.key())

    def approx_le(self, other: Number, rtol: float = 1e-12) -> bool:
        """self <= other up to a relative tolerance on the leading level"""
        other = LogValue.coerce(other)
        a, b = self.key(), other.key()
        if a <= b:
            return True
        if a[0] != b[0] or math.isinf(a[0]):
            return False
        return a[1] <= b[1] + rtol * max(1.0, abs(b[1]))

    def approx_ge(self, other: Number, rtol: float = 1e-12) -> bool:
        return LogValue.coerce(other).approx_le(self, rtol)

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: Number) -> "LogValue":
        other = LogValue.coerce(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.depth == 0 and other.depth == 0:
            return LogValue.from_log(float(np.logaddexp(self.level, other.level)))
        return max(self, other)

    __radd__ = __add__

    def __sub__(self, other: Number) -> "LogValue":
        other = LogValue.coerce(other)
        if other > self:
            raise ValueError("LogValue difference would be negative")
        if other.is_zero():
            return self
        if self.key() == other.key():
            return LogValue.zero()
        if self.depth == 0 and other.depth == 0:
            gap = other.level - self.level
            return LogValue.from_log(self.level + math.log1p(-math.exp(gap)))
        return self

    def __mul__(self, other: Number) -> "LogValue":
        other = LogValue.coerce(other)
        if self.is_zero() or other.is_zero():
            return LogValue.zero()
        if self.depth == 0 and other.depth == 0:
            return LogValue.from_log(self.level + other.level)
        sign, magnitude = _signed_sum(self.log_sign(), _safe_mag(self),
                                      other.log_sign(), _safe_mag(other))
        return LogValue.pack(sign, magnitude)

    __rmul__ = __mul__

    def reciprocal(self) -> "LogValue":
        if self.is_zero():
            raise ZeroDivisionError("reciprocal of zero")
        if self.depth == 0:
            return LogValue(1, 0, -self.level)
        return LogValue(-self.sign, self.depth, self.level)

    def __truediv__(self, other: Number) -> "LogValue":
        return self * LogValue.coerce(other).reciprocal()

    def __rtruediv__(self, other: Number) -> "LogValue":
        return LogValue.coerce(other) * self.reciprocal()

    def __pow__(self, power: float) -> "LogValue":
        power = float(power)
        if power == 0:
            return LogValue.one()
        if self.is_zero():
            if power < 0:
                raise ZeroDivisionError("negative power of zero")
            return self
        if self.depth == 0:
            scaled = self.level * power
            if abs(scaled) < BIG:
                return LogValue(1, 0, scaled)
        sign = self.log_sign() * (1 if power > 0 else -1)
        magnitude = self.mag() * LogValue.from_float(abs(power))
        return LogValue.pack(sign, magnitude)

    def __repr__(self) -> str:
        if self.is_zero():
            return "LogValue(0)"
        if self.depth == 0:
            return f"LogValue(ln={self.level!r})"
        return f"LogValue(sign={self.sign}, depth={self.depth}, level={self.level!r})"


def _safe_mag(value: LogValue) -> LogValue:
    if value.depth == 0 and value.level == 0:
        return LogValue.zero()
    return value.mag()


def _signed_sum(sign_a: int, mag_a: LogValue, sign_b: int, mag_b: LogValue) -> Tuple[int, LogValue]:
    """(sign, |s|) of sign_a*mag_a + sign_b*mag_b"""
    if sign_a == 0 or mag_a.is_zero():
        return (sign_b if sign_b != 0 else 1), mag_b
    if sign_b == 0 or mag_b.is_zero():
        return sign_a, mag_a
    if sign_a == sign_b:
        return sign_a, mag_a + mag_b
    if mag_a >= mag_b:
        return sign_a, mag_a - mag_b
    return sign_b, mag_b - mag_a
