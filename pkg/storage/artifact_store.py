"""Artifact storage: CSV tables, PPM rasters and run manifests"""
import hashlib
import logging
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd
from dotenv import dotenv_values

from .models import RunManifest
import config

logger = logging.getLogger(__name__)

# class code -> RGB
CLASS_COLORS = {
    0: (0, 0, 0),        # Bounded
    1: (40, 110, 220),   # EscapingWithinRate
    2: (230, 160, 30),   # UnbViolation
    3: (220, 40, 40),    # FastEscaping
    4: (128, 128, 128),  # Undetermined
}

MANIFEST_NAME = "manifest.txt"


class ArtifactStore:
    """Writes run outputs under one directory and records their digests"""

    def __init__(self, out_dir: Optional[Path] = None):
        self.out_dir = Path(out_dir) if out_dir is not None else config.OUTPUT_DIR
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.digests: Dict[str, str] = {}

    def _record(self, path: Path) -> Path:
        self.digests[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()
        logger.info(f"wrote {path}")
        return path

    def write_csv(self, name: str, table: pd.DataFrame) -> Path:
        """CSV with 17 significant digits and LF line endings"""
        path = self.out_dir / name
        table.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return self._record(path)

    def write_ppm(self, name: str, raster: np.ndarray) -> Path:
        """Binary PPM (P6) of a class-code raster"""
        codes = np.asarray(raster, dtype=np.int64)
        palette = np.zeros((max(CLASS_COLORS) + 1, 3), dtype=np.uint8)
        for code, rgb in CLASS_COLORS.items():
            palette[code] = rgb
        pixels = palette[codes]
        height, width = codes.shape
        path = self.out_dir / name
        with open(path, "wb") as f:
            f.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
            f.write(pixels.tobytes())
        return self._record(path)

    def write_manifest(self, manifest: RunManifest) -> Path:
        manifest.outputs = dict(self.digests)
        path = self.out_dir / MANIFEST_NAME
        path.write_text(manifest.to_text(), encoding="utf-8", newline="\n")
        logger.info(f"wrote {path}")
        return path


def read_manifest(path: Path) -> RunManifest:
    return RunManifest.from_pairs(dotenv_values(path))


def read_ppm(path: Path) -> np.ndarray:
    """Class codes of a raster written by write_ppm"""
    data = Path(path).read_bytes()
    header, _, rest = data.partition(b"\n255\n")
    width, height = (int(v) for v in header.split()[1:3])
    pixels = np.frombuffer(rest, dtype=np.uint8).reshape(height, width, 3)
    codes = np.full((height, width), -1, dtype=np.int64)
    for code, rgb in CLASS_COLORS.items():
        codes[np.all(pixels == rgb, axis=-1)] = code
    return codes
