from .sweep import (
    LoadFlowDivergedError,
    SeriesSolution,
    VoltageSolution,
    loadflow_series,
    nonlinear_loadflow,
)
from .sensitivity import SensitivityModel, build_sensitivity, linear_voltages
from .limits import Limits, ViolationReport, screen_limits, screen_series

__all__ = [
    "LoadFlowDivergedError",
    "SeriesSolution",
    "VoltageSolution",
    "loadflow_series",
    "nonlinear_loadflow",
    "SensitivityModel",
    "build_sensitivity",
    "linear_voltages",
    "Limits",
    "ViolationReport",
    "screen_limits",
    "screen_series",
]
