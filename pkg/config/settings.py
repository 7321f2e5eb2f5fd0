# ===================================================================================
# Project: Unsharp
# File: config/settings.py
# Description: This script loads the project settings from the environment (and an optional .env file).
#              Numerical tolerances, oracle and quadrature sizes, seeds and output formatting live here.
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================

import os
from dotenv import load_dotenv

load_dotenv()

# Verdict labels
VERDICT_JOINTLY_MEASURABLE = "JointlyMeasurable"
VERDICT_NOT_JOINTLY_MEASURABLE = "NotJointlyMeasurable"
VERDICT_BOUNDARY = "Boundary"

# Seed: UNSHARP_SEED wins over any --seed flag
DEFAULT_SEED = 0
SEED_ENV_VAR = "UNSHARP_SEED"

# Operator validation tolerances (hermiticity, positivity, POM sum, trace, orthogonality)
TOLERANCE = float(os.getenv("UNSHARP_TOL", "1e-9"))

# Closed-form coexistence verdict band
BOUNDARY_BAND = float(os.getenv("UNSHARP_BOUNDARY_BAND", "1e-9"))

# Feasibility oracle
ORACLE_TOL = float(os.getenv("UNSHARP_ORACLE_TOL", "1e-7"))
ORACLE_GRID_POINTS = int(os.getenv("UNSHARP_ORACLE_GRID", "21"))
ORACLE_MAX_RESTARTS = int(os.getenv("UNSHARP_ORACLE_RESTARTS", "4"))

# Sphere quadrature
MESH_SUBDIVISIONS = int(os.getenv("UNSHARP_MESH_SUBDIVISIONS", "3"))
MC_SAMPLES = int(os.getenv("UNSHARP_MC_SAMPLES", "1000000"))

# Tomography
RECONSTRUCT_TOL = float(os.getenv("UNSHARP_RECONSTRUCT_TOL", "1e-8"))

# Output (magnitudes below OUTPUT_ZERO print as 0)
OUTPUT_DIGITS = int(os.getenv("UNSHARP_OUTPUT_DIGITS", "12"))
OUTPUT_ZERO = float(os.getenv("UNSHARP_OUTPUT_ZERO", "1e-14"))

# Logs directory
LOG_DIR = os.getenv("UNSHARP_LOG_DIR", "logs")
