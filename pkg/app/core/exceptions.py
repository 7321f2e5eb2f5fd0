# ===================================================================================
# Project: Unsharp
# File: app/core/exceptions.py
# Description: This file contains the exception types raised by the library. The CLI maps them to exit codes.
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================


class UnsharpError(Exception):
    """Base class for all library errors."""


class InvalidOperatorError(UnsharpError, ValueError):
    """An effect, state, POM, vector or stochastic matrix failed validation."""


class DimensionMismatchError(UnsharpError, ValueError):
    """Operands live on Hilbert spaces of different dimension."""


class InconsistentDataError(UnsharpError, ValueError):
    """Data is not in the range of the map being inverted (e.g. tomography residuals)."""


class OracleConvergenceError(UnsharpError, RuntimeError):
    """The feasibility oracle could not settle a verdict."""
