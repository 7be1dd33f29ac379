"""
Local covers near a point whose orbit is unbounded relative to a rate
sequence. At a qualifying index n the disk D(xi, delta_n) is covered by N_n
disks of diameter at most c2 rho_n phi(t_n), and the ledger records every
inequality that makes sum h(diam D_j) <= eps delta_n^2.

All quantities that involve phi are LogValues; rows compare logarithms.
"""
import logging
import math
from typing import List, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, ConfigDict

import config
from errors import PreconditionError
from logspace import LogValue
from storage.models import LedgerRow
from strip import GaugeProfile, tau

logger = logging.getLogger(__name__)

LN4 = math.log(4.0)
LEDGER_RTOL = 1e-9


class OrbitCoverRecipe(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    t: float
    s: float
    r: float
    l: float
    rho: LogValue
    delta: LogValue
    n_balls: LogValue
    ball_diameter: LogValue
    rows: List[LedgerRow]

    @property
    def ok(self) -> bool:
        return all(row.passed for row in self.rows)

    def failed(self) -> List[str]:
        return [row.name for row in self.rows if not row.passed]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump() for row in self.rows],
                            columns=["name", "lhs_log", "rhs_log", "slack", "passed", "note"])


def _describe(value: LogValue) -> str:
    if value.depth == 0:
        return f"ln={value.level:.6g}"
    return f"tower sign={value.sign} depth={value.depth} level={value.level:.6g}"


def _ledger_row(name: str, lhs: LogValue, rhs: LogValue, note: str = "") -> LedgerRow:
    """lhs <= rhs in log space; towers get their level-index form in the note"""
    if lhs.is_zero():
        slack = math.inf
    elif rhs.is_zero():
        slack = -math.inf
    else:
        slack = (rhs / lhs).log()
    if lhs.depth > 0 or rhs.depth > 0:
        towers = f"lhs {_describe(lhs)}; rhs {_describe(rhs)}"
        note = f"{note}; {towers}" if note else towers
    return LedgerRow(name=name, lhs_log=lhs.log(), rhs_log=rhs.log(), slack=slack,
                     passed=lhs.approx_le(rhs, LEDGER_RTOL), note=note)


def _float_row(name: str, lhs: float, rhs: float, note: str = "") -> LedgerRow:
    """lhs <= rhs for plain reals; the log columns hold the values themselves"""
    return LedgerRow(name=name, lhs_log=lhs, rhs_log=rhs, slack=rhs - lhs,
                     passed=lhs <= rhs + 1e-12 * max(1.0, abs(rhs)), note=note or "linear scale")


def qualifying_index(moduli: Sequence[float], profile: GaugeProfile, n: int) -> bool:
    """|f^n(xi)| >= p_n and |f^n(xi)| >= 6/n^2 + max_(k<n) |f^k(xi)|"""
    m = float(moduli[n])
    return m >= profile.p_n(n) and m >= 6.0 / n ** 2 + max(float(v) for v in moduli[:n])


def find_qualifying_indices(moduli: Sequence[float], profile: GaugeProfile) -> List[int]:
    top = min(len(moduli) - 1, profile.n_max)
    return [n for n in range(2, top + 1) if qualifying_index(moduli, profile, n)]


def _ball_count(l: float, phi_t: LogValue) -> LogValue:
    """2 ceil(l / phi(t)) squares of side phi(t) cover Q_n inside the strip"""
    columns = LogValue.from_float(l) / phi_t
    if columns.depth == 0 and columns.level < 50:
        return LogValue.from_float(2.0 * math.ceil(columns.to_float()))
    return columns * 2.0


def orbit_cover_recipe(profile: GaugeProfile, moduli: Sequence[float], n: int, eps: float,
                       rho_log: Optional[float] = None, C: float = 1.0,
                       c1: Optional[float] = None, c2: Optional[float] = None) -> OrbitCoverRecipe:
    """
    Cover parameters and the inequality ledger at a qualifying index n.

    moduli[k] = |f^k(xi)| for k = 0..n. rho_log is ln 1/|(f^n)'(xi)| when a
    measured derivative product is available; otherwise the Cauchy-estimate
    lower bound for rho_n is used.
    """
    c1 = config.COVER_C1 if c1 is None else c1
    c2 = config.COVER_C2 if c2 is None else c2
    if not 2 <= n <= profile.n_max:
        raise PreconditionError(f"n must be in [2, {profile.n_max}], got {n}")
    if len(moduli) < n + 1:
        raise PreconditionError(f"need moduli |f^k(xi)| for k = 0..{n}")
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    if not qualifying_index(moduli, profile, n):
        raise PreconditionError(f"not a qualifying index: n = {n}")

    m = float(moduli[n])
    earlier = max(float(v) for v in moduli[:n])
    inv_sq = 1.0 / n ** 2
    t, s, r = m - inv_sq, m - 3 * inv_sq, m - 5 * inv_sq
    l = 2 * inv_sq
    if t > profile.x_end:
        raise PreconditionError(f"t_n = {t:.6g} beyond the profile range {profile.x_end:.6g}")

    phi_t, phi_s, phi_r = profile.value_log(t), profile.value_log(s), profile.value_log(r)
    g = profile.factor.eval_log
    rows = [
        _float_row("qualifying_rate", profile.p_n(n), m),
        _float_row("qualifying_gap", 6 * inv_sq + earlier, m),
        _float_row("r_above_previous_rate", profile.p_n(n - 1), r),
        _ledger_row("chain_at_t", g(phi_t), tau(phi_s), "g(phi(t)) <= tau(phi(s))"),
        _ledger_row("decay_at_r", phi_r, LogValue.from_log(-(n - 1) * LN4), "phi(r) <= 4^-(n-1)"),
        _ledger_row("decay_vs_index", LogValue.from_log(-(n - 1) * LN4), LogValue.from_float(inv_sq)),
        _ledger_row("level_curve_inside", phi_r * 8.0, LogValue.from_float(l), "r + 8 phi(r) <= s"),
    ]

    n_balls = _ball_count(l, phi_t)
    rows.append(_ledger_row(
        "cover_count", LogValue.from_float(2 * l) / phi_t, n_balls,
        "squares of side phi(t); disks around them are sqrt(2) larger, absorbed by c2",
    ))

    # Cauchy estimate: |f'(f^k xi)| <= n^2 max_{|z|=r} |f| for every k < n
    rows.append(_float_row("cauchy_radius", earlier, r - inv_sq))
    rows.append(_ledger_row("index_vs_width", LogValue.from_float(n ** 2), phi_s.reciprocal()))
    rows.append(_ledger_row("growth_constant", LogValue.from_float(C), phi_s.reciprocal()))
    per_step = phi_s * LogValue.pack(-1, LogValue.exp(phi_s.reciprocal() ** 5))
    rho_bound = per_step ** n
    rows.append(_ledger_row("rho_vs_tau", LogValue.from_log(n * LN4) * tau(phi_s), rho_bound,
                            "rho_n >= (phi(s) exp(-exp(phi(s)^-5)))^n >= 4^n tau(phi(s))"))

    rho = rho_bound
    if rho_log is not None:
        rho = LogValue.from_log(float(rho_log))
        rows.append(_ledger_row("rho_measured_vs_bound", rho_bound, rho))

    scale = c1 ** 2 * eps / (c2 * n ** 2)
    rows.append(_ledger_row("final_bound", g(phi_t), rho * scale, "g(phi(t)) <= c1^2 eps rho / (c2 n^2)"))
    rows.append(_ledger_row("c2_rho_small", rho * c2, LogValue.one()))

    delta = rho * (c1 * l)
    ball_diameter = rho * c2 * phi_t
    mass = n_balls * ball_diameter * g(ball_diameter)
    rows.append(_ledger_row("sum_vs_target", mass, delta * delta * eps, "N h(c2 rho phi(t)) <= eps delta^2"))

    recipe = OrbitCoverRecipe(n=n, t=t, s=s, r=r, l=l, rho=rho, delta=delta, n_balls=n_balls,
                              ball_diameter=ball_diameter, rows=rows)
    if recipe.ok:
        logger.info(f"cover recipe at n={n}: {len(rows)} inequalities hold, delta {_describe(delta)}")
    else:
        logger.warning(f"cover recipe at n={n}: failed {', '.join(recipe.failed())}")
    return recipe
