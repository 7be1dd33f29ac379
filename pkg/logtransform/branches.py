"""
Families of disjoint squares W_j in the log-tract, each the image of the
quarter square S(F(z_x), h/4) under a branch of F^-2.

For the exponential family the branches are w -> phi(phi(w) + 2 pi i k) + 2 pi i l
with k1 < k < k2 and l_k <= l < l_k + N_x. The number of them is of order
exp(5h/4), so the family is lazy: squares are produced per index and the
geometric conditions are checked on sampled k.
"""
import logging
import math
import random
from typing import Callable, List, NamedTuple, Sequence, Tuple

import mpmath

import config
from errors import PreconditionError
from storage.models import BoundReport
from .models import ClassBModel, ExponentialModel
from .transform import tract_growth

logger = logging.getLogger(__name__)

DIAMETER_FACTOR = 1e-5
ROUND_TRIP_TOL = 1e-8


class BranchSquare(NamedTuple):
    """W_j with D(center, inner) inside W_j inside D(center, outer)"""
    k: int
    l: int
    center: complex
    inner: mpmath.mpf  # radii fall below the float range from x = 7 on
    outer: mpmath.mpf


class BranchFamily:
    def __init__(self, model: ExponentialModel, x: float):
        growth = tract_growth(model, x)
        self.model = model
        self.x = float(x)
        self.h = growth.h
        self.h_prime = growth.h_prime
        self.r_x = self.h / (16 * self.h_prime)
        self.R_x = self.h / self.h_prime
        self.n_x = int(math.floor((self.h / 2 - 3) / (2 * math.pi)))
        if self.n_x < 1:
            raise PreconditionError(f"x = {x} below threshold: h/2 - 3 < 2 pi")
        # k reaches about exp(5h/4) / 2 pi
        self.dps = int(1.25 * self.h / math.log(10)) + config.MP_GUARD_DIGITS
        self.reports: List[BoundReport] = []

        with mpmath.workdps(self.dps):
            c = mpmath.mpc(model.log_lam.real, model.log_lam.imag)
            self._c = c
            self._a = mpmath.mpf(self.x) - c
            self.k1 = self._threshold(0.75 * self.h + 1)
            self.k2 = self._threshold(1.25 * self.h - 1) + 1
        if self.k2 - self.k1 - 1 < 1:
            raise PreconditionError(f"x = {x} below threshold: no k strictly between k1 and k2")
        self.count = (self.k2 - self.k1 - 1) * self.n_x
        logger.info(f"branch family at x={x}: N_x={self.n_x}, k in ({mpmath.nstr(mpmath.mpf(self.k1), 4)}, {mpmath.nstr(mpmath.mpf(self.k2), 4)})")

    def _threshold(self, level: float) -> int:
        """Largest k with |a + 2 pi i k| <= e^level"""
        a = self._a
        rad = mpmath.exp(2 * mpmath.mpf(level)) - a.real ** 2
        if rad < 0:
            raise PreconditionError(f"x = {self.x} below threshold: |Re a| exceeds e^{level:.4g}")
        return int(mpmath.floor((mpmath.sqrt(rad) - a.imag) / (2 * mpmath.pi)))

    @property
    def center(self) -> complex:
        """F(z_x), the center of the quarter square"""
        return complex(math.exp(self.x)) + self.model.log_lam

    def _u(self, k: int):
        return self._a + 2j * mpmath.pi * k

    def d(self, k: int):
        """|phi'(z_x + 2 pi i k)|"""
        with mpmath.workdps(self.dps):
            return 1 / abs(self._u(k))

    def v(self, k: int):
        """phi(z_x + 2 pi i k)"""
        with mpmath.workdps(self.dps):
            return mpmath.log(self._u(k))

    def l_start(self, k: int) -> int:
        with mpmath.workdps(self.dps):
            c_im = self._c.imag
            return int(mpmath.ceil((c_im - self.h / 4 + 1 - self.v(k).imag) / (2 * mpmath.pi)))

    def index(self, j: int) -> Tuple[int, int]:
        if not 0 <= j < self.count:
            raise PreconditionError(f"index {j} outside [0, {self.count})")
        q, r = divmod(j, self.n_x)
        k = self.k1 + 1 + q
        return k, self.l_start(k) + r

    def center_mp(self, k: int, l: int):
        with mpmath.workdps(self.dps):
            return self.v(k) + 2j * mpmath.pi * l

    def square(self, k: int, l: int) -> BranchSquare:
        """W_(k, l) as a disk sandwich; the float center is for export only"""
        with mpmath.workdps(self.dps):
            d = self.d(k)
            center = self.center_mp(k, l)
            return BranchSquare(
                k=k,
                l=l,
                center=complex(center),
                inner=d * self.r_x / 4,
                outer=2 * d * self.R_x,
            )

    def branch(self, k: int, l: int) -> Callable:
        """The branch of F^-2 onto W_(k, l), evaluated in multiprecision"""
        c = self._c

        def apply(w):
            with mpmath.workdps(self.dps):
                w = mpmath.mpc(w)
                inner = mpmath.log(w - c) + 2j * mpmath.pi * k
                return mpmath.log(inner - c) + 2j * mpmath.pi * l

        return apply

    def forward(self, z):
        """F(z) = e^z + Log lambda in multiprecision"""
        with mpmath.workdps(self.dps):
            return mpmath.exp(z) + self._c

    def diameter_sum_lower(self):
        """
        Certified lower bound of sum diam W_j: each W_j contains a disk of
        radius d_k r_x / 4, and sum d_k over k1 < k < k2 dominates the
        integral of 1/|a + 2 pi i t| from k1 + 1 to k2.
        """
        with mpmath.workdps(self.dps):
            A, B = abs(self._a.real), self._a.imag
            if A == 0:
                raise PreconditionError("x equals ln|lambda|; the integral bound degenerates")
            two_pi = 2 * mpmath.pi
            integral = (mpmath.asinh((B + two_pi * self.k2) / A) - mpmath.asinh((B + two_pi * (self.k1 + 1)) / A)) / two_pi
            return self.n_x * (mpmath.mpf(self.r_x) / 2) * integral

    def diameter_target(self) -> float:
        return DIAMETER_FACTOR * self.h ** 3 / self.h_prime

    def sample_ks(self, count: int = 16, seed: int = 0) -> List[int]:
        rng = random.Random(seed)
        lo, hi = self.k1 + 1, self.k2 - 1
        ks = {lo, hi}
        while len(ks) < min(count, hi - lo + 1):
            ks.add(rng.randint(lo, hi))
        return sorted(ks)

    def check_runtime_bounds(self, ks: Sequence[int]) -> BoundReport:
        """d_k <= 1/(4 pi), T_k <= 1 and |v_(k+1) - v_k| <= 1"""
        worst, witness = 0.0, None
        with mpmath.workdps(self.dps):
            for k in ks:
                d = self.d(k)
                step = abs(self.v(k + 1) - self.v(k))
                ratio = float(max(4 * mpmath.pi * d, 2 * d * self.R_x, step))
                if ratio > worst:
                    worst, witness = ratio, str(k)
        return BoundReport(name="runtime_bounds", ok=worst <= 1, samples=len(ks), max_slack=worst, witness=witness)

    def check_containment(self, ks: Sequence[int]) -> BoundReport:
        """Outer disks of W_(k, l) inside S(F(z_x), h/4) for the extreme l"""
        quarter = self.h / 4
        worst, witness = 0.0, None
        with mpmath.workdps(self.dps):
            c_im = self._c.imag
            for k in ks:
                first = self.l_start(k)
                for l in (first, first + self.n_x - 1):
                    sq = self.square(k, l)
                    v = self.v(k)
                    re_gap = abs(v.real - self.h) + sq.outer
                    im_gap = abs(v.imag + 2 * mpmath.pi * l - c_im) + sq.outer
                    ratio = float(max(re_gap, im_gap) / quarter)
                    if ratio > worst:
                        worst, witness = ratio, f"{k},{l}"
        return BoundReport(name="containment", ok=worst <= 1, samples=2 * len(ks), max_slack=worst, witness=witness)

    def check_disjointness(self, ks: Sequence[int]) -> BoundReport:
        """Outer disks of neighbouring squares do not meet"""
        worst, witness, checks = 0.0, None, 0
        with mpmath.workdps(self.dps):
            for k in ks:
                l = self.l_start(k)
                here = self.square(k, l)
                anchor = self.center_mp(k, l)
                neighbours = [self.square(k, l + 1)]
                if k + 1 < self.k2:
                    neighbours += [self.square(k + 1, l + dl) for dl in (-1, 0, 1)]
                for other in neighbours:
                    distance = abs(anchor - self.center_mp(other.k, other.l))
                    ratio = float((here.outer + other.outer) / distance)
                    checks += 1
                    if ratio > worst:
                        worst, witness = ratio, f"{k},{l} ~ {other.k},{other.l}"
        return BoundReport(name="disjointness", ok=worst < 1, samples=checks, max_slack=worst, witness=witness)

    def check_round_trip(self, ks: Sequence[int], per_k: int = 4, seed: int = 0) -> BoundReport:
        """F^2 undoes each branch on the quarter square, and images land in the outer disk"""
        rng = random.Random(seed)
        quarter = self.h / 4
        worst, witness, checks = 0.0, None, 0
        with mpmath.workdps(self.dps):
            center = mpmath.mpc(self.center)
            for k in ks:
                l = self.l_start(k)
                sq = self.square(k, l)
                target = self.center_mp(k, l)
                branch = self.branch(k, l)
                for _ in range(per_k):
                    w = center + quarter * 0.999 * mpmath.mpc(rng.uniform(-1, 1), rng.uniform(-1, 1))
                    z = branch(w)
                    error = float(abs(self.forward(self.forward(z)) - w)) / ROUND_TRIP_TOL
                    placed = float(abs(z - target) / sq.outer)
                    ratio = max(error, placed)
                    checks += 1
                    if ratio > worst:
                        worst, witness = ratio, f"{k},{l} at {complex(w)}"
        return BoundReport(name="round_trip", ok=worst <= 1, samples=checks, max_slack=worst, witness=witness)

    def check_extension(self, n: int = 256) -> BoundReport:
        """phi maps the half square S(F(z_x), h/2) into H"""
        half = self.h / 2
        worst, witness = 0.0, None
        center = self.center
        for i in range(n):
            t = -1 + 2 * i / n
            for w in (center + half * complex(t, -1), center + half * complex(1, t),
                      center + half * complex(-t, 1), center + half * complex(-1, -t)):
                height = math.log(abs(w - self.model.log_lam))
                ratio = math.exp(self.model.log_R - height)
                if ratio > worst:
                    worst, witness = ratio, repr(w)
        return BoundReport(name="half_square_extension", ok=worst < 1, samples=4 * n, max_slack=worst, witness=witness)

    def check_diameter_sum(self) -> BoundReport:
        lower = self.diameter_sum_lower()
        target = self.diameter_target()
        ratio = float(target / lower) if lower > 0 else math.inf
        return BoundReport(name="diameter_sum", ok=ratio <= 1, samples=1, max_slack=ratio, witness=mpmath.nstr(lower, 12))

    def verify(self, samples: int = 16, seed: int = 0) -> List[BoundReport]:
        ks = self.sample_ks(samples, seed)
        self.reports = [
            self.check_runtime_bounds(ks),
            self.check_containment(ks),
            self.check_disjointness(ks),
            self.check_round_trip(ks, seed=seed),
            self.check_extension(),
            self.check_diameter_sum(),
        ]
        return self.reports


def branch_squares(model: ClassBModel, x: float, samples: int = 16, seed: int = 0) -> BranchFamily:
    """The verified family of squares W_j at abscissa x"""
    if not isinstance(model, ExponentialModel):
        raise PreconditionError("branch squares need the closed-form branches of the exponential family")
    family = BranchFamily(model, x)
    failed = [r.name for r in family.verify(samples, seed) if not r.ok]
    if failed:
        raise PreconditionError(f"x = {x} below threshold: {', '.join(failed)} failed")
    return family
