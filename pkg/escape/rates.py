"""Rate sequences p_n and their normalization"""
import logging
import math
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from errors import PreconditionError
from storage.models import BoundReport

logger = logging.getLogger(__name__)

NAMED_RATES = {
    "n": lambda n: float(n),
    "2^n": lambda n: 2.0 ** n if n < 1024 else math.inf,
    "n^2": lambda n: float(n) ** 2,
    "sqrt": lambda n: math.sqrt(n),
    "log": lambda n: math.log(n + 1.0),
}


class RateSequence:
    """n -> p_n for n >= 1, from a closed form or a table"""

    def __init__(self, p: Callable[[int], float], name: str = "rate", normalized: bool = False,
                 threshold: int = 1, size: Optional[int] = None):
        self._p = p
        self.name = name
        self.normalized = normalized
        self.threshold = threshold
        self.size = size  # table length, None for closed forms

    @classmethod
    def from_callable(cls, p: Callable[[int], float], name: str = "rate") -> "RateSequence":
        return cls(p, name=name)

    @classmethod
    def from_table(cls, values: Sequence[float], name: str = "table", normalized: bool = False) -> "RateSequence":
        table = [float(v) for v in values]
        if not table:
            raise PreconditionError("empty rate table")

        def lookup(n: int) -> float:
            if not 1 <= n <= len(table):
                raise PreconditionError(f"rate table has no entry for n = {n}")
            return table[n - 1]

        return cls(lookup, name=name, normalized=normalized, size=len(table))

    @classmethod
    def parse(cls, text: str) -> "RateSequence":
        """A named rate ("n", "2^n", "n^2", "sqrt", "log") or a comma separated table"""
        text = text.strip()
        if text in NAMED_RATES:
            return cls(NAMED_RATES[text], name=text)
        try:
            return cls.from_table([float(v) for v in text.split(",")])
        except ValueError:
            raise PreconditionError(f"unknown rate sequence: {text!r}")

    def __call__(self, n: int) -> float:
        if n < 1:
            raise PreconditionError(f"rates start at n = 1, got {n}")
        return float(self._p(n))

    def values(self, N: int) -> np.ndarray:
        """p_1, ..., p_N"""
        return np.array([self(n) for n in range(1, N + 1)])

    def __repr__(self) -> str:
        return f"RateSequence({self.name}, normalized={self.normalized})"


def zeta_tail(n: int) -> float:
    """sum_(k > n) 1/k^2, so that 6 sum_(k <= n) 1/k^2 - pi^2 = -6 zeta_tail(n)"""
    return float(mpmath.zeta(2, n + 1))


def normalize_rate_sequence(p: RateSequence, N: int) -> RateSequence:
    """
    q_n = min(n, inf_(k >= n) p_k) + 6 sum_(k <= n) 1/k^2 - pi^2 for n <= N.

    The infimum runs over a sample reaching 2N. The result satisfies
    q_n <= p_n, q_n <= n and q_n - q_(n-1) >= 6/n^2.
    """
    if N < 2:
        raise PreconditionError("normalization needs N >= 2")
    with np.errstate(over="ignore"):
        sample = p.values(2 * N if p.size is None else min(2 * N, p.size))
    if len(sample) < N:
        raise PreconditionError(f"rate table shorter than N = {N}")
    if np.any(np.isnan(sample)):
        raise PreconditionError("rate sequence has NaN entries")
    suffix_min = np.minimum.accumulate(sample[::-1])[::-1]
    if not suffix_min[N - 1] > suffix_min[(N - 1) // 2]:
        raise PreconditionError(f"rate sequence {p.name} does not tend to infinity on [1, {len(sample)}]")

    q = [min(float(n), float(suffix_min[n - 1])) - 6 * zeta_tail(n) for n in range(1, N + 1)]
    logger.debug(f"normalized {p.name} up to N={N}: q_N = {q[-1]:.6g}")
    return RateSequence.from_table(q, name=f"normalized({p.name})", normalized=True)


def check_normalized(q: RateSequence, p: RateSequence, N: int) -> BoundReport:
    """q_n <= p_n, q_n <= n and q_n - q_(n-1) >= 6/n^2 for n <= N"""
    worst, witness = -math.inf, None
    previous = None
    for n in range(1, N + 1):
        qn = q(n)
        gaps = [qn - p(n), qn - n]
        if previous is not None:
            gaps.append(6.0 / n ** 2 - (qn - previous))
        previous = qn
        if max(gaps) > worst:
            worst, witness = max(gaps), f"n={n}"
    return BoundReport(name="normalized_rate", ok=worst <= 1e-12, samples=N, max_slack=worst, witness=witness)
