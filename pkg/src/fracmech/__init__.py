"""Fractional viscoelasticity, modal dynamics, hereditary kernels, drafting kinetics and cam design."""

from __future__ import annotations

__version__ = "0.1.0"

from ._accel import backend
from .errors import (
    BracketError,
    FracmechError,
    NumericalError,
    ParameterError,
    PoleError,
    SeriesConvergenceError,
    SingularSystemError,
)

__all__ = [
    "BracketError",
    "FracmechError",
    "NumericalError",
    "ParameterError",
    "PoleError",
    "SeriesConvergenceError",
    "SingularSystemError",
    "__version__",
    "backend",
]
