"""Contractions, iterated function schemes and scheme sequences on the unit square"""
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.spatial import cKDTree
from scipy.special import logsumexp

import config
from errors import PreconditionError

logger = logging.getLogger(__name__)

SQUARE_CENTER = 0.5 + 0.5j
SQUARE_RADIUS = math.sqrt(2.0) / 2.0  # max distance from the center to a point of D
SQUARE_DIAMETER = math.sqrt(2.0)

CylinderCode = Tuple[int, ...]


def square_grid(n: int) -> np.ndarray:
    """n x n grid of points of D = [0,1] x [0,1]"""
    axis = np.linspace(0.0, 1.0, n)
    re, im = np.meshgrid(axis, axis)
    return (re + 1j * im).ravel()


def square_boundary(n: int) -> np.ndarray:
    """4n points on the boundary of D"""
    t = np.linspace(0.0, 1.0, n, endpoint=False)
    return np.concatenate([t, 1 + 1j * t, (1 - t) + 1j, 1j * (1 - t)])


class ContractionMap:
    """A map T: D -> D with certified b|z-w| <= |T(z)-T(w)| <= c|z-w|"""

    def __init__(
        self,
        apply: Callable[[np.ndarray], np.ndarray],
        b_lower: float,
        c_upper: float,
        derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        name: str = "",
    ):
        if not 0 < b_lower <= c_upper < 1:
            raise PreconditionError(f"need 0 < b <= c < 1, got b={b_lower}, c={c_upper}")
        self._apply = apply
        self.b_lower = float(b_lower)
        self.c_upper = float(c_upper)
        self.derivative = derivative
        self.name = name

    @classmethod
    def similarity(cls, ratio: float, offset: complex = 0.0, rotation: complex = 1.0) -> "ContractionMap":
        """z -> offset + ratio*rotation*z with |rotation| = 1"""
        factor = ratio * rotation

        def apply(z):
            return offset + factor * np.asarray(z, dtype=complex)

        def derivative(z):
            return np.full(np.shape(z), factor, dtype=complex)

        return cls(apply, ratio, ratio, derivative, name=f"sim({ratio:g},{offset})")

    def __call__(self, z) -> np.ndarray:
        return self._apply(np.asarray(z, dtype=complex))

    def compose(self, inner: "ContractionMap") -> "ContractionMap":
        """self o inner"""
        outer = self
        derivative = None
        if outer.derivative is not None and inner.derivative is not None:
            def derivative(z):
                z = np.asarray(z, dtype=complex)
                return outer.derivative(inner(z)) * inner.derivative(z)

        return ContractionMap(
            lambda z: outer(inner(z)),
            outer.b_lower * inner.b_lower,
            outer.c_upper * inner.c_upper,
            derivative,
            name=f"{outer.name}o{inner.name}",
        )

    def maps_square_into_square(self, n: int = 16, tol: float = 1e-12) -> bool:
        image = self(square_grid(n))
        return bool(
            np.all(image.real >= -tol) and np.all(image.real <= 1 + tol)
            and np.all(image.imag >= -tol) and np.all(image.imag <= 1 + tol)
        )


class StageStats(BaseModel):
    """Summary statistics of one scheme, in log form so huge schemes fit"""
    log_min_b: float
    log_max_b: float
    s: float
    log_separation: float
    log_lower_sum: float
    log_arity: float

    @property
    def separation(self) -> float:
        return math.exp(self.log_separation)


class PrefixStats(BaseModel):
    """Worst-case statistics over a prefix of stages"""
    log_alpha: float
    log_beta: float
    gamma: float
    delta: float
    log_d: float


def prefix_stats(stats: Sequence[StageStats]) -> List[PrefixStats]:
    """Running alpha (min b), beta (max b), gamma (min s), delta (max s), d (min separation)"""
    result = []
    for k, st in enumerate(stats):
        if k == 0:
            current = PrefixStats(log_alpha=st.log_min_b, log_beta=st.log_max_b,
                                  gamma=st.s, delta=st.s, log_d=st.log_separation)
        else:
            prev = result[-1]
            current = PrefixStats(
                log_alpha=min(prev.log_alpha, st.log_min_b),
                log_beta=max(prev.log_beta, st.log_max_b),
                gamma=min(prev.gamma, st.s),
                delta=max(prev.delta, st.s),
                log_d=min(prev.log_d, st.log_separation),
            )
        result.append(current)
    return result


class BaseScheme:
    """Interface shared by explicit and statistics-only schemes"""

    name: str = ""

    def power_sum_log(self, s: float) -> float:
        """ln sum_j b_j**s"""
        raise NotImplementedError

    @property
    def log_min_b(self) -> float:
        raise NotImplementedError

    @property
    def log_max_b(self) -> float:
        raise NotImplementedError

    @property
    def log_lower_sum(self) -> float:
        return self.power_sum_log(1.0)

    @property
    def log_arity(self) -> float:
        raise NotImplementedError

    @property
    def log_separation(self) -> float:
        raise NotImplementedError

    @property
    def s(self) -> float:
        if getattr(self, "_s", None) is None:
            from .dimension import scheme_exponent
            self._s = scheme_exponent(self)
        return self._s

    def stats(self) -> StageStats:
        return StageStats(
            log_min_b=self.log_min_b,
            log_max_b=self.log_max_b,
            s=self.s,
            log_separation=self.log_separation,
            log_lower_sum=self.log_lower_sum,
            log_arity=self.log_arity,
        )


class Scheme(BaseScheme):
    """One stage of an iterated function scheme given by explicit maps"""

    def __init__(self, maps: List[ContractionMap], separation: Optional[float] = None, name: str = ""):
        if not maps:
            raise PreconditionError("a scheme needs at least one map")
        self.maps = list(maps)
        self.name = name
        self._s = None
        self._separation = separation

    @property
    def arity(self) -> int:
        return len(self.maps)

    @property
    def lower_bounds(self) -> np.ndarray:
        return np.array([m.b_lower for m in self.maps])

    @property
    def upper_bounds(self) -> np.ndarray:
        return np.array([m.c_upper for m in self.maps])

    def power_sum_log(self, s: float) -> float:
        return float(logsumexp(s * np.log(self.lower_bounds)))

    @property
    def log_min_b(self) -> float:
        return float(np.log(self.lower_bounds.min()))

    @property
    def log_max_b(self) -> float:
        return float(np.log(self.lower_bounds.max()))

    @property
    def log_arity(self) -> float:
        return math.log(self.arity)

    @property
    def lower_sum(self) -> float:
        return float(self.lower_bounds.sum())

    @property
    def separation(self) -> float:
        if self._separation is None:
            self._separation = estimate_separation(self.maps)
        return self._separation

    @property
    def log_separation(self) -> float:
        return math.log(self.separation) if self.separation > 0 else -math.inf

    def images_disjoint(self, n: Optional[int] = None) -> bool:
        """Sampled images pairwise at distance >= d(1 - tol)"""
        if self.arity == 1:
            return True
        n = n or config.SEPARATION_GRID
        measured = _min_foreign_distance([m(square_boundary(n)) for m in self.maps])
        return measured >= self.separation * (1 - 1e-9) and measured > 0


def _min_foreign_distance(images: List[np.ndarray]) -> float:
    """Smallest distance between sample points that belong to different images"""
    points = np.concatenate(images)
    labels = np.concatenate([np.full(len(img), i) for i, img in enumerate(images)])
    xy = np.column_stack([points.real, points.imag])
    tree = cKDTree(xy)
    k = min(len(points), max(len(img) for img in images) + 1)
    dist, idx = tree.query(xy, k=k)
    foreign = labels[idx] != labels[:, None]
    dist = np.where(foreign, dist, np.inf)
    return float(dist.min())


def estimate_separation(maps: List[ContractionMap], n: Optional[int] = None) -> float:
    """
    Lower bound for the distance between the images T_i(D).

    Boundary samples of each image are compared; every boundary point of D lies
    within half a sample spacing of a sample, so the images move by at most
    c * spacing / 2 from what was sampled.
    """
    if len(maps) == 1:
        return 1.0
    n = n or config.SEPARATION_GRID
    images = [m(square_boundary(n)) for m in maps]
    measured = _min_foreign_distance(images)
    slack = max(m.c_upper for m in maps) * (1.0 / n)
    separation = measured - slack
    if separation <= 0:
        logger.warning(f"scheme images overlap or touch (sampled distance {measured:.3g})")
        return 0.0
    return separation


class ComposedScheme(BaseScheme):
    """Statistics of P^p o Q without enumerating its maps"""

    def __init__(self, outer: BaseScheme, power: int, inner: BaseScheme, name: str = ""):
        self.outer = outer
        self.power = power
        self.inner = inner
        self.name = name or f"P^{power}oQ"
        self._s = None

    def power_sum_log(self, s: float) -> float:
        return self.inner.power_sum_log(s) + self.power * self.outer.power_sum_log(s)

    @property
    def log_min_b(self) -> float:
        return self.inner.log_min_b + self.power * self.outer.log_min_b

    @property
    def log_max_b(self) -> float:
        return self.inner.log_max_b + self.power * self.outer.log_max_b

    @property
    def log_arity(self) -> float:
        return self.inner.log_arity + self.power * self.outer.log_arity

    @property
    def log_separation(self) -> float:
        return composed_log_separation(self.outer, self.power, self.inner)


def composed_log_separation(outer: BaseScheme, power: int, inner: BaseScheme) -> float:
    """Distance between images of distinct words of P^p o Q"""
    if power == 0:
        return inner.log_separation
    via_outer = outer.log_separation + (power - 1) * outer.log_min_b
    via_inner = inner.log_separation + power * outer.log_min_b
    candidates = [via_outer]
    if inner.log_arity > 0:
        candidates.append(via_inner)
    return min(candidates)


class SchemeSequence:
    """
    A sequence of schemes T_1, T_2, ... with an optional schedule (n_i).

    Stages past the stored list repeat the last one when `repeat_last` is set.
    """

    def __init__(self, stages: List[BaseScheme], schedule: Optional[List[int]] = None, repeat_last: bool = True):
        if not stages:
            raise PreconditionError("a scheme sequence needs at least one stage")
        if schedule is not None and any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise PreconditionError("schedule must be strictly increasing")
        self.stages = list(stages)
        self.schedule = list(schedule) if schedule else []
        self.repeat_last = repeat_last

    @classmethod
    def constant(cls, scheme: BaseScheme) -> "SchemeSequence":
        return cls([scheme])

    @classmethod
    def from_pool(cls, pool: List[BaseScheme], schedule: List[int]) -> "SchemeSequence":
        """T_k = R_i for n_{i-1} < k <= n_i; without n_I the last stage repeats"""
        if len(schedule) not in (len(pool) - 1, len(pool)):
            raise PreconditionError("need one schedule index per pool stage, or one fewer")
        stages, prev = [], 0
        for scheme, n in zip(pool, schedule):
            stages.extend([scheme] * (n - prev))
            prev = n
        if len(schedule) < len(pool):
            stages.append(pool[-1])
        return cls(stages, schedule)

    @classmethod
    def from_interleaved(cls, p_stages: List[BaseScheme], q_stages: List[BaseScheme], schedule: List[int]) -> "SchemeSequence":
        """T_k = P_i for n_{i-1} < k < n_i and T_{n_i} = Q_i"""
        if len(schedule) > min(len(p_stages), len(q_stages)):
            raise PreconditionError("schedule longer than the supplied stages")
        stages, prev = [], 0
        for i, n in enumerate(schedule):
            stages.extend([p_stages[i]] * (n - prev - 1))
            stages.append(q_stages[i])
            prev = n
        return cls(stages, schedule, repeat_last=False)

    def stage(self, k: int) -> BaseScheme:
        """T_k, 1-based"""
        if k < 1:
            raise PreconditionError("stages are numbered from 1")
        if k > len(self.stages):
            if not self.repeat_last:
                raise PreconditionError(f"stage {k} beyond the {len(self.stages)} stored stages")
            return self.stages[-1]
        return self.stages[k - 1]

    def explicit_stage(self, k: int) -> Scheme:
        scheme = self.stage(k)
        if not isinstance(scheme, Scheme):
            raise PreconditionError(f"stage {k} has no explicit maps")
        return scheme

    def stage_stats(self, depth: Optional[int] = None) -> List[PrefixStats]:
        depth = depth or len(self.stages)
        return prefix_stats([self.stage(k).stats() for k in range(1, depth + 1)])

    def arities(self, depth: int) -> List[int]:
        return [self.explicit_stage(k).arity for k in range(1, depth + 1)]

    def validate_code(self, code: Sequence[int]) -> None:
        for level, j in enumerate(code, start=1):
            arity = self.explicit_stage(level).arity
            if not 0 <= j < arity:
                raise PreconditionError(f"index {j} at level {level} outside 0..{arity - 1}")
