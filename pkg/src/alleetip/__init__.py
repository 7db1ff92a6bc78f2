"""Threshold population dynamics with a moving Allee parameter.

The growth law couples a logarithmic saturation term with a logarithmic
threshold term, which makes the solution explicit, lets populations hit
zero in finite time, and yields an integral inequality deciding whether
a moving threshold tips a trajectory into extinction.
"""

__version__ = "0.1.0"

from .calibrate import FitConfig, FitResult, Observations, PredictionResult
from .exact import ExtinctionReport, ToleranceError
from .integrators import StepSizeError, Trajectory
from .model import ModelParams
from .schedules import (
    AlleeSchedule,
    Constant,
    LogSigmoid,
    Oscillatory,
    Sigmoid,
    Tabulated,
)
from .tipping import Crossing, ThresholdReport, TippingVerdict

__all__ = [
    "__version__",
    "ModelParams",
    "AlleeSchedule",
    "Constant",
    "Sigmoid",
    "LogSigmoid",
    "Oscillatory",
    "Tabulated",
    "Trajectory",
    "StepSizeError",
    "ExtinctionReport",
    "ToleranceError",
    "Crossing",
    "ThresholdReport",
    "TippingVerdict",
    "Observations",
    "FitConfig",
    "FitResult",
    "PredictionResult",
]
