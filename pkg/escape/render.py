"""Class rasters over a window of the plane"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

import numpy as np

import config
from errors import PreconditionError
from logtransform import ClassBModel
from .classify import classify_orbit
from .orbits import max_modulus_tower
from .rates import RateSequence

logger = logging.getLogger(__name__)


def pixel_centers(window: Sequence[float], size: Tuple[int, int]) -> Tuple[np.ndarray, np.ndarray]:
    """Real parts left to right and imaginary parts top to bottom"""
    x_min, x_max, y_min, y_max = (float(v) for v in window)
    width, height = size
    if not (x_max > x_min and y_max > y_min):
        raise PreconditionError(f"empty window {tuple(window)}")
    if width < 1 or height < 1:
        raise PreconditionError(f"grid must be at least 1x1, got {width}x{height}")
    xs = x_min + (np.arange(width) + 0.5) * (x_max - x_min) / width
    ys = y_max - (np.arange(height) + 0.5) * (y_max - y_min) / height
    return xs, ys


def render_partition(model: ClassBModel, window: Sequence[float], size: Tuple[int, int], rate: RateSequence,
                     horizon: int, threads: Optional[int] = None, fast_base: Optional[float] = None) -> np.ndarray:
    """
    (height, width) array of class codes. Rows are classified independently
    and collected in row order, so the raster does not depend on threads.
    """
    width, height = size
    if width * height > config.RENDER_PIXEL_CAP:
        raise PreconditionError(f"{width}x{height} grid exceeds the pixel cap {config.RENDER_PIXEL_CAP}")
    xs, ys = pixel_centers(window, size)
    threads = config.THREADS if threads is None else threads
    fast_base = config.FAST_BASE_R if fast_base is None else fast_base
    tower = max_modulus_tower(model, fast_base, horizon)

    def row(y: float) -> np.ndarray:
        return np.array([
            classify_orbit(model, complex(x, y), rate, horizon, fast_base, tower)[0].code for x in xs
        ], dtype=np.int64)

    logger.info(f"rendering {width}x{height} over {tuple(window)} with {threads} thread(s)")
    if threads <= 1:
        rows = [row(y) for y in ys]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, ys))
    raster = np.vstack(rows)
    counts = np.bincount(raster.ravel(), minlength=5)
    logger.info(f"class counts: {counts.tolist()}")
    return raster
