"""Limit-set sampling, cylinder masses and the mass distribution check"""
import logging
import math
from typing import Optional, Sequence

import numpy as np
import pandas as pd

import config
from errors import PreconditionError
from gauge import GaugeFn
from .schemes import SQUARE_CENTER, SQUARE_DIAMETER, SQUARE_RADIUS, SchemeSequence

logger = logging.getLogger(__name__)


class LimitSample:
    """One representative point per depth-k cylinder, codes in lexicographic order"""

    def __init__(self, points: np.ndarray, codes: np.ndarray, radius: float):
        self.points = points
        self.codes = codes
        self.radius = radius  # every point lies within this distance of its cylinder

    def __len__(self) -> int:
        return len(self.points)


def _apply_codes(seq: SchemeSequence, codes: np.ndarray, seed: complex) -> np.ndarray:
    """(T_{1,j1} o ... o T_{k,jk})(seed) for every row of codes"""
    points = np.full(len(codes), seed, dtype=complex)
    depth = codes.shape[1]
    for level in range(depth, 0, -1):
        stage = seq.explicit_stage(level)
        column = codes[:, level - 1]
        for j, transform in enumerate(stage.maps):
            mask = column == j
            if np.any(mask):
                points[mask] = transform(points[mask])
    return points


def limit_set_points(seq: SchemeSequence, depth: int, seed: Optional[complex] = None) -> LimitSample:
    """Representative points of all depth-k cylinders"""
    if depth < 0:
        raise PreconditionError("depth must be nonnegative")
    seed = SQUARE_CENTER if seed is None else complex(seed)
    if depth == 0:
        return LimitSample(np.array([seed]), np.zeros((1, 0), dtype=np.int64), SQUARE_DIAMETER)

    arities = seq.arities(depth)
    count = math.prod(arities)
    if count > config.CYLINDER_CAP:
        raise PreconditionError(f"{count} cylinders exceed the cap of {config.CYLINDER_CAP}")

    codes = np.column_stack(np.unravel_index(np.arange(count), arities)).astype(np.int64)
    points = np.full(1, seed, dtype=complex)
    # build from the innermost stage so the first index varies slowest
    for level in range(depth, 0, -1):
        stage = seq.explicit_stage(level)
        points = np.concatenate([transform(points) for transform in stage.maps])
    radius = SQUARE_DIAMETER * math.prod(
        float(seq.explicit_stage(k).upper_bounds.max()) for k in range(1, depth + 1)
    )
    logger.debug(f"sampled {count} cylinders at depth {depth}")
    return LimitSample(points, codes, radius)


def cylinder_measure(seq: SchemeSequence, code: Sequence[int]) -> float:
    """mu of the cylinder with this (0-based) code: prod b**s per stage"""
    seq.validate_code(code)
    log_mass = 0.0
    for level, j in enumerate(code, start=1):
        stage = seq.explicit_stage(level)
        log_mass += stage.s * math.log(stage.maps[j].b_lower)
    return math.exp(log_mass)


def cylinder_masses(seq: SchemeSequence, depth: int) -> np.ndarray:
    """Masses of all depth-k cylinders in lexicographic code order"""
    masses = np.ones(1)
    for level in range(1, depth + 1):
        stage = seq.explicit_stage(level)
        masses = np.outer(masses, stage.lower_bounds ** stage.s).ravel()
    return masses


def _target_depth(seq: SchemeSequence, radius: float) -> int:
    """Smallest k whose cylinders have diameter below radius/4"""
    bound, k = SQUARE_DIAMETER, 0
    while bound >= radius / 4:
        k += 1
        bound *= float(seq.explicit_stage(k).upper_bounds.max())
        if k > 4096:
            raise PreconditionError("radius too small for the scheme contraction")
    return k


def ball_masses(seq: SchemeSequence, centers: np.ndarray, radius: float) -> np.ndarray:
    """
    Upper estimate of mu(D(x, r)) for every center.

    Cylinders are descended breadth first; a cylinder inside the disk
    contributes its mass, one outside is dropped, and at the target depth every
    cylinder still meeting the disk is counted.
    """
    centers = np.asarray(centers, dtype=complex)
    target = _target_depth(seq, radius)
    totals = np.zeros(len(centers))

    owner = np.arange(len(centers))
    codes = np.zeros((len(centers), 0), dtype=np.int64)
    log_mass = np.zeros(len(centers))
    log_c = np.zeros(len(centers))
    level = 0
    while len(owner):
        points = _apply_codes(seq, codes, SQUARE_CENTER) if level else np.full(len(owner), SQUARE_CENTER)
        reach = SQUARE_RADIUS * np.exp(log_c)
        dist = np.abs(points - centers[owner])
        inside = dist + reach < radius
        meets = dist < radius + reach
        final = meets & (inside | (level >= target))
        np.add.at(totals, owner[final], np.exp(log_mass[final]))

        keep = meets & ~final
        owner, codes, log_mass, log_c = owner[keep], codes[keep], log_mass[keep], log_c[keep]
        if not len(owner):
            break
        level += 1
        stage = seq.explicit_stage(level)
        m = stage.arity
        owner = np.repeat(owner, m)
        codes = np.column_stack([np.repeat(codes, m, axis=0), np.tile(np.arange(m), len(codes))])
        log_mass = np.repeat(log_mass, m) + np.tile(stage.s * np.log(stage.lower_bounds), len(log_c))
        log_c = np.repeat(log_c, m) + np.tile(np.log(stage.upper_bounds), len(log_c))
    return totals


def mass_distribution_check(seq: SchemeSequence, gauge: GaugeFn, centers, radii) -> pd.DataFrame:
    """Table of mu(D(x,r)) / h(r) over centers and decreasing radii"""
    radii = np.asarray(list(radii), dtype=float)
    if np.any(np.diff(radii) >= 0):
        raise PreconditionError("radii must be strictly decreasing")
    centers = np.asarray(centers, dtype=complex)
    rows = []
    for r in radii:
        masses = ball_masses(seq, centers, r)
        h_r = float(gauge(r))
        for x, mass in zip(centers, masses):
            rows.append({
                "center_re": x.real,
                "center_im": x.imag,
                "radius": r,
                "mass": mass,
                "gauge": h_r,
                "ratio": mass / h_r if h_r > 0 else math.inf,
            })
    return pd.DataFrame(rows)


def ratio_trend(table: pd.DataFrame) -> float:
    """Mean ratio at the smallest radius over mean ratio at the largest"""
    means = table.groupby("radius")["ratio"].mean()
    return float(means.loc[means.index.min()] / means.loc[means.index.max()])
