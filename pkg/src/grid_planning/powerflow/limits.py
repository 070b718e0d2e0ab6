from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from grid_planning.network.model import GridNetwork
from grid_planning.powerflow.sweep import SeriesSolution, VoltageSolution


@dataclass(frozen=True)
class Limits:
    v_min: float = 0.95
    v_max: float = 1.05

    def __post_init__(self) -> None:
        if not self.v_min < self.v_max:
            raise ValueError(f"v_min ({self.v_min}) must be below v_max ({self.v_max})")

    @classmethod
    def from_deviation(cls, deviation: float, nominal: float = 1.0) -> "Limits":
        if deviation <= 0:
            raise ValueError(f"voltage deviation limit must be > 0 (got {deviation})")
        return cls(nominal - deviation, nominal + deviation)

    def excess(self, v: np.ndarray) -> np.ndarray:
        """Signed limit excess per entry; positive means violated."""
        v = np.asarray(v, dtype=float)
        return np.maximum(v - self.v_max, self.v_min - v)


@dataclass(frozen=True)
class VoltageViolation:
    bus: int
    v: float
    excess: float  # p.u. beyond the violated limit


@dataclass(frozen=True)
class CurrentViolation:
    segment: int
    from_bus: int
    to_bus: int
    current: float  # A
    ampacity: float  # A
    excess: float  # A


@dataclass(frozen=True)
class ViolationReport:
    voltage: List[VoltageViolation] = field(default_factory=list)
    current: List[CurrentViolation] = field(default_factory=list)
    transformer_overload: float = 0.0  # loading above 100 %, as a fraction

    @property
    def feasible(self) -> bool:
        return not self.voltage and not self.current and self.transformer_overload <= 0.0


def screen_limits(
    grid: GridNetwork,
    solution: VoltageSolution,
    v_min: float,
    v_max: float,
    tol: float = 0.0,
) -> ViolationReport:
    """List buses outside [v_min, v_max], overloaded segments and transformer overload."""
    if not solution.converged:
        raise ValueError("screen_limits needs a converged load flow solution")
    limits = Limits(v_min, v_max)
    excess = limits.excess(solution.v)
    volt = [
        VoltageViolation(int(b), float(solution.v[b]), float(excess[b]))
        for b in np.flatnonzero(excess > tol)
    ]
    amp = np.array([grid.segment_ampacity(k) for k in range(len(grid.segments))])
    over = solution.line_currents - amp
    curr = [
        CurrentViolation(
            segment=int(k),
            from_bus=grid.segments[k].from_bus,
            to_bus=grid.segments[k].to_bus,
            current=float(solution.line_currents[k]),
            ampacity=float(amp[k]),
            excess=float(over[k]),
        )
        for k in np.flatnonzero(over > 0.0)
    ]
    overload = max(0.0, solution.transformer_loading - 1.0)
    return ViolationReport(volt, curr, overload)


@dataclass(frozen=True)
class WindowViolation:
    hour: int
    bus: int
    v: float
    excess: float


def screen_series(
    solution: SeriesSolution, limits: Limits, tol: float = 0.0
) -> List[WindowViolation]:
    """Every (hour, bus) voltage violation of a window, hour-major order."""
    excess = limits.excess(solution.v)
    hours, buses = np.nonzero(excess > tol)
    return [
        WindowViolation(int(t), int(b), float(solution.v[t, b]), float(excess[t, b]))
        for t, b in zip(hours, buses)
    ]


def segment_overloads(grid: GridNetwork, solution: SeriesSolution) -> np.ndarray:
    """Peak current over the window minus effective ampacity, per segment (A)."""
    amp = np.array([grid.segment_ampacity(k) for k in range(len(grid.segments))])
    if solution.line_currents.size == 0:
        return np.zeros(0)
    return solution.line_currents.max(axis=0) - amp
