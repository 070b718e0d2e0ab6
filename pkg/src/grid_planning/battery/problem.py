from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from grid_planning.network import GridNetwork, InjectionSeries
from grid_planning.powerflow import Limits, SensitivityModel

CountMode = Literal["auto", "max", "exact"]

C_MAX_KWH = 1000.0
P_MAX_KW = 500.0
C_MIN_KWH = 1.0
EFFICIENCY = 0.95
CURTAILMENT_PENALTY = 0.25  # euro/kWh
THROUGHPUT_COST = 0.01  # euro/kWh charged or discharged
CAPACITY_EPS_KWH = 0.1


@dataclass(frozen=True)
class BatteryCount:
    """Battery-count constraint: ``auto`` (unconstrained), ``max-n`` or ``=n``."""

    mode: CountMode = "auto"
    n: Optional[int] = None

    def __post_init__(self) -> None:
        if self.mode == "auto":
            if self.n is not None:
                raise ValueError("auto battery count takes no number")
        elif self.n is None or self.n < 0:
            raise ValueError(f"{self.mode} battery count needs n >= 0 (got {self.n})")

    @classmethod
    def parse(cls, text: str) -> "BatteryCount":
        s = str(text).strip().lower()
        if s in ("", "auto", "unconstrained"):
            return cls()
        m = re.fullmatch(r"(?:max-|<=)(\d+)", s)
        if m:
            return cls("max", int(m.group(1)))
        m = re.fullmatch(r"=?(\d+)", s)
        if m:
            return cls("exact", int(m.group(1)))
        raise ValueError(f"battery constraint must be n, =n, max-n or auto (got {text!r})")

    @property
    def label(self) -> str:
        if self.mode == "auto":
            return "auto"
        return f"={self.n}" if self.mode == "exact" else f"max-{self.n}"


@dataclass(frozen=True)
class PlacementProblem:
    grid: GridNetwork
    model: SensitivityModel
    injections: InjectionSeries  # window, kW
    limits: Limits
    candidate_buses: Tuple[int, ...]
    count: BatteryCount = BatteryCount()
    c_max: float = C_MAX_KWH
    p_max: float = P_MAX_KW
    c_min: float = C_MIN_KWH
    charge_efficiency: float = EFFICIENCY
    discharge_efficiency: float = EFFICIENCY
    allow_curtailment: bool = False
    curtailment_penalty: float = CURTAILMENT_PENALTY
    throughput_cost: float = THROUGHPUT_COST
    power_factor: Optional[float] = None
    dt_hours: float = 1.0
    enforce_ampacity: bool = True
    ampacity_factor: float = 1.0
    v_margin: float = 0.0  # p.u. the MILP keeps inside each voltage limit

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidate_buses", tuple(int(b) for b in self.candidate_buses))
        for name in ("charge_efficiency", "discharge_efficiency"):
            eta = getattr(self, name)
            if not 0.0 < eta <= 1.0:
                raise ValueError(f"{name} must be in (0, 1] (got {eta})")
        if not self.candidate_buses:
            raise ValueError("candidate bus set is empty")
        if len(set(self.candidate_buses)) != len(self.candidate_buses):
            raise ValueError("duplicate candidate bus")
        known = {int(b) for b in self.model.bus_ids}
        for b in self.candidate_buses:
            if b not in known:
                raise ValueError(f"candidate bus {b} is not a non-slack bus of the grid")
        if self.injections.n_buses != self.grid.n_buses:
            raise ValueError(
                f"injections cover {self.injections.n_buses} buses, grid has {self.grid.n_buses}"
            )
        if not 0.0 <= self.c_min <= self.c_max or self.p_max <= 0:
            raise ValueError("battery sizes need 0 <= c_min <= c_max and p_max > 0")
        if self.curtailment_penalty < 0 or self.throughput_cost < 0 or self.dt_hours <= 0:
            raise ValueError("curtailment_penalty and throughput_cost must be >= 0, dt_hours > 0")
        if not 0.0 < self.ampacity_factor <= 1.0:
            raise ValueError(f"ampacity_factor must be in (0, 1] (got {self.ampacity_factor})")
        if self.v_margin < 0:
            raise ValueError(f"v_margin must be >= 0 (got {self.v_margin})")
        if self.limits.v_min + self.v_margin >= self.limits.v_max - self.v_margin:
            raise ValueError(f"v_margin {self.v_margin} closes the voltage band {self.limits}")

    @property
    def hours(self) -> int:
        return self.injections.hours

    @property
    def max_batteries(self) -> Optional[int]:
        return self.count.n if self.count.mode == "max" else None

    @property
    def exact_batteries(self) -> Optional[int]:
        return self.count.n if self.count.mode == "exact" else None

    @property
    def row_limits(self) -> Limits:
        """Voltage band the MILP rows enforce: ``limits`` narrowed by ``v_margin``."""
        return Limits(self.limits.v_min + self.v_margin, self.limits.v_max - self.v_margin)

    def base_voltages(self) -> np.ndarray:
        """Linear-model voltages without storage (hours x model buses)."""
        from grid_planning.powerflow import linear_voltages

        s = self.injections.pu(self.grid, self.power_factor)[:, self.model.bus_ids]
        return linear_voltages(self.model, s.real, s.imag)


# ---------------- Plan ----------------


@dataclass(frozen=True)
class Placement:
    bus: int
    capacity_kwh: float
    power_kw: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bus": self.bus,
            "capacity_kwh": round(self.capacity_kwh, 3),
            "power_kw": round(self.power_kw, 3),
        }


@dataclass(frozen=True)
class BatteryPlan:
    """
    Placed batteries with their dispatch over the window. Trajectory arrays
    are (hours x placements); ``curtailment_kw`` is (hours x buses) or None.
    """

    placements: Tuple[Placement, ...] = ()
    timestamps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype="datetime64[s]"))
    charge_kw: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    discharge_kw: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    soc_kwh: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    curtailment_kw: Optional[np.ndarray] = None
    capex: float = 0.0
    annual_cost: float = 0.0
    curtailment_cost: float = 0.0
    proven_optimal: bool = True
    gap: float = 0.0

    @property
    def count(self) -> int:
        return len(self.placements)

    @property
    def total_capacity_kwh(self) -> float:
        return float(sum(p.capacity_kwh for p in self.placements))

    @property
    def trajectories(self) -> np.ndarray:
        """Charge (+) / discharge (-) kW per hour and battery."""
        return self.charge_kw - self.discharge_kw

    @property
    def empty(self) -> bool:
        return not self.placements

    def bus_profiles(self, n_buses: int, hours: int) -> Tuple[np.ndarray, np.ndarray]:
        """Charge and discharge scattered onto bus columns (hours x buses, kW)."""
        charge = np.zeros((hours, n_buses))
        discharge = np.zeros((hours, n_buses))
        for k, p in enumerate(self.placements):
            if self.charge_kw.shape[0] != hours:
                raise ValueError(
                    f"plan covers {self.charge_kw.shape[0]} hours, window has {hours}"
                )
            charge[:, p.bus] += self.charge_kw[:, k]
            discharge[:, p.bus] += self.discharge_kw[:, k]
        return charge, discharge

    def to_dict(self) -> Dict[str, Any]:
        return {
            "placements": [p.to_dict() for p in self.placements],
            "capex_eur": round(self.capex, 2),
            "annual_cost_eur": round(self.annual_cost, 2),
            "curtailment_cost_eur": round(self.curtailment_cost, 2),
            "proven_optimal": self.proven_optimal,
            "gap": self.gap,
        }


def placements_from_dict(raw: Dict[str, Any]) -> List[Placement]:
    return [
        Placement(int(p["bus"]), float(p["capacity_kwh"]), float(p["power_kw"]))
        for p in raw.get("placements", [])
    ]


def binding_summary(
    base_excess: np.ndarray, bus_ids: Sequence[int], limit: int = 10
) -> Tuple[List[int], List[int]]:
    """Hours and buses whose base voltage violates the limits, worst first."""
    hours, cols = np.nonzero(base_excess > 0)
    order = np.argsort(-base_excess[hours, cols], kind="stable")
    seen_h: List[int] = []
    seen_b: List[int] = []
    for idx in order:
        h, b = int(hours[idx]), int(bus_ids[cols[idx]])
        if h not in seen_h:
            seen_h.append(h)
        if b not in seen_b:
            seen_b.append(b)
    return seen_h[:limit], seen_b[:limit]
