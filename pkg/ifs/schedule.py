"""Stage schedules, interleaving P^p o Q and the power-scheme check"""
import itertools
import logging
import math
import sys
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

import config
from errors import NumericFailure, PreconditionError
from gauge import GaugeFn
from .schemes import (
    BaseScheme,
    ComposedScheme,
    ContractionMap,
    PrefixStats,
    Scheme,
    StageStats,
    composed_log_separation,
    prefix_stats,
)

logger = logging.getLogger(__name__)

TINY = sys.float_info.min
CHUNK = 4096


def _eps_callable(eps: Union[Callable, GaugeFn, float, None]) -> Callable[[np.ndarray], np.ndarray]:
    if eps is None:
        return lambda t: np.zeros_like(np.asarray(t, dtype=float))
    if isinstance(eps, GaugeFn):
        if eps.form != "exponent":
            raise PreconditionError("schedule needs an exponent-form gauge")
        return eps.eps
    if callable(eps):
        return eps
    level = float(eps)
    return lambda t: np.full(np.shape(t), level)


def _as_stats(item: Union[BaseScheme, StageStats]) -> StageStats:
    return item if isinstance(item, StageStats) else item.stats()


def schedule_margin(current: PrefixStats, following: PrefixStats, eps, n) -> np.ndarray:
    """
    gamma' - delta' ln(alpha' d') / ln(d beta^n) - (1 + 2 eps(d beta^n)).

    Unprimed statistics are worst cases over R_1..R_i, primed over R_1..R_{i+1}.
    Nonnegative exactly where n satisfies the schedule inequality.
    """
    eps = _eps_callable(eps)
    n = np.asarray(n, dtype=float)
    log_r = current.log_d + n * current.log_beta
    with np.errstate(divide="ignore", invalid="ignore"):
        lhs = following.gamma - following.delta * (following.log_alpha + following.log_d) / log_r
        t = np.maximum(np.exp(np.minimum(log_r, 0.0)), TINY)
        rhs = 1.0 + 2.0 * np.asarray(eps(t), dtype=float)
    margin = lhs - rhs
    return np.where(log_r < 0, margin, -np.inf)


def schedule_indices(pool: Sequence[Union[BaseScheme, StageStats]], eps=None, start: int = 0) -> List[int]:
    """Least increasing n_1 < n_2 < ... satisfying the schedule inequality for each pool prefix"""
    stats = [_as_stats(item) for item in pool]
    if len(stats) < 2:
        raise PreconditionError("a schedule needs at least two pool stages")
    for i, st in enumerate(stats, start=1):
        if st.s <= 1:
            raise PreconditionError(f"stage {i} has exponent {st.s:.6g} <= 1")
        if not math.isfinite(st.log_separation):
            raise PreconditionError(f"stage {i} has no positive separation")
    running = prefix_stats(stats)

    indices, previous = [], start
    for i in range(len(stats) - 1):
        n = _least_index(running[i], running[i + 1], eps, previous + 1)
        indices.append(n)
        previous = n
    logger.info(f"schedule indices: {indices}")
    return indices


def _least_index(current: PrefixStats, following: PrefixStats, eps, first: int) -> int:
    lo = first
    while lo <= config.SCHEDULE_CAP:
        candidates = np.arange(lo, min(lo + CHUNK, config.SCHEDULE_CAP + 1))
        ok = schedule_margin(current, following, eps, candidates) >= 0
        if np.any(ok):
            return int(candidates[np.argmax(ok)])
        lo += CHUNK
    raise NumericFailure(f"schedule inequality unsatisfied up to n = {config.SCHEDULE_CAP}")


def interleave_schemes(outer: BaseScheme, inner: BaseScheme) -> Tuple[int, BaseScheme]:
    """
    Least p >= 0 with m_Q * min b(Q) * (sum b(P))^p > 1 and the scheme R = P^p o Q.

    R has explicit maps when both inputs are explicit and it stays small;
    otherwise only its statistics are carried.
    """
    log_sum = outer.log_lower_sum
    if log_sum <= 0:
        raise PreconditionError(f"outer scheme has lower sum {math.exp(log_sum):.6g} <= 1")
    base = inner.log_arity + inner.log_min_b
    power = 0
    while base + power * log_sum <= 0:
        power += 1
        if power > 10 ** 7:
            raise NumericFailure("interleaving power does not terminate")

    explicit = isinstance(outer, Scheme) and isinstance(inner, Scheme)
    if explicit and inner.arity * outer.arity ** power <= config.INTERLEAVE_CAP:
        return power, _compose_explicit(outer, power, inner)
    return power, ComposedScheme(outer, power, inner)


def _compose_explicit(outer: Scheme, power: int, inner: Scheme) -> Scheme:
    maps = []
    for j in inner.maps:
        for word in itertools.product(outer.maps, repeat=power):
            # word = (P_{q_p}, ..., P_{q_1}); the rightmost acts first
            composed = j
            for transform in reversed(word):
                composed = transform.compose(composed)
            maps.append(composed)
    separation = math.exp(composed_log_separation(outer, power, inner))
    return Scheme(maps, separation=separation, name=f"{outer.name}^{power}o{inner.name}")


class PowerCheck(BaseModel):
    power: Optional[int]
    sums: List[float]


def power_scheme_check(scheme: Scheme, s: float, max_power: int = 6) -> PowerCheck:
    """
    Smallest p for which the certified bounds of all p-fold compositions
    satisfy sum b_i**s > 1.
    """
    from distortion import certify_branch_contraction

    sums = []
    for p in range(1, max_power + 1):
        if scheme.arity ** p > config.INTERLEAVE_CAP:
            break
        total = 0.0
        for word in itertools.product(scheme.maps, repeat=p):
            composed = word[-1]
            for transform in reversed(word[:-1]):
                composed = transform.compose(composed)
            b = composed.b_lower
            if composed.derivative is not None:
                try:
                    certificate = certify_branch_contraction(
                        composed, derivative=composed.derivative, center=0.5 + 0.5j, half_side=0.5, grid=16,
                    )
                    b = max(certificate.b_lower, b)
                except PreconditionError:
                    logger.debug(f"no Koebe certificate for a {p}-fold composition; using its declared bound")
            total += b ** s
        sums.append(total)
        if total > 1:
            return PowerCheck(power=p, sums=sums)
    return PowerCheck(power=None, sums=sums)


def similarity_scheme(ratios: Sequence[float], offsets: Sequence[complex]) -> Scheme:
    """Scheme of similarities z -> offset + ratio*z"""
    if len(ratios) != len(offsets):
        raise PreconditionError("need one offset per ratio")
    return Scheme([ContractionMap.similarity(r, o) for r, o in zip(ratios, offsets)])
