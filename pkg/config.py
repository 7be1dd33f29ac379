"""Configuration settings for escapekit"""
import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

VERSION = "0.4.0"

# Base paths
BASE_DIR = Path(__file__).parent
OUTPUT_DIR = Path(os.getenv("ESCAPEKIT_OUTPUT_DIR", str(BASE_DIR / "output")))

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Gauge functions
GAUGE_ETA = float(os.getenv("GAUGE_ETA", "1.0"))  # gauges live on [0, eta)
GRID_POINTS = int(os.getenv("GRID_POINTS", "4096"))
GRID_MIN = float(os.getenv("GRID_MIN", "1e-12"))
VANISHING_TOL = 1e-2  # g(t_min) / g(t_max) below this counts as tending to 0

# Iterated function schemes
CYLINDER_CAP = int(os.getenv("CYLINDER_CAP", "10000000"))
DIMENSION_BRACKET = float(os.getenv("DIMENSION_BRACKET", "64.0"))
DIMENSION_TOL = 1e-13
SEPARATION_GRID = 32  # per side, for sampled images
SCHEDULE_CAP = int(os.getenv("SCHEDULE_CAP", "1000000"))
INTERLEAVE_CAP = 4096

# Distortion
KOEBE_PADDING = float(os.getenv("KOEBE_PADDING", "0.5"))
DERIVATIVE_GRID = int(os.getenv("DERIVATIVE_GRID", "64"))

# Quadrature
QUAD_RTOL = float(os.getenv("QUAD_RTOL", "1e-10"))
QUAD_LIMIT = 200
QUAD_RETRIES = int(os.getenv("QUAD_RETRIES", "3"))

# Strip profiles and contour functions
PROFILE_GRID = 10000
CONTOUR_NODE_SPACING = float(os.getenv("CONTOUR_NODE_SPACING", "0.01"))
TRUNCATION_EXP = float(os.getenv("TRUNCATION_EXP", "40.0"))  # stop where e^{Re w} exceeds this
NORMALIZATION_TARGET = 0.4
PROFILE_ORBIT_CAP = int(os.getenv("PROFILE_ORBIT_CAP", "2000000"))

# Covers
COVER_C1 = float(os.getenv("COVER_C1", "0.0625"))
COVER_C2 = float(os.getenv("COVER_C2", "8.0"))
MULTIPLICITY_GRID_CAP = int(os.getenv("MULTIPLICITY_GRID_CAP", "4000000"))
REFINEMENT_LEVELS = 3

# Escape classification
FAST_BASE_R = float(os.getenv("FAST_BASE_R", "1.0"))
FAST_SHIFT_MAX = 4
TRAP_RUN = int(os.getenv("TRAP_RUN", "200"))
TRAP_RADIUS = 0.1
OVERFLOW_MODULUS = 1e300
RENDER_PIXEL_CAP = int(os.getenv("RENDER_PIXEL_CAP", "4194304"))
THREADS = int(os.getenv("THREADS", "1"))

# Precision for branch arithmetic (decimal digits beyond the size of the index)
MP_GUARD_DIGITS = 30
