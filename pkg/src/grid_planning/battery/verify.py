from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from grid_planning.battery.problem import BatteryPlan
from grid_planning.network import GridNetwork, InjectionSeries
from grid_planning.powerflow import Limits, SensitivityModel, linear_voltages, loadflow_series
from grid_planning.powerflow.limits import WindowViolation, screen_series, segment_overloads


def plan_injections(series: InjectionSeries, plan: BatteryPlan) -> InjectionSeries:
    """Window injections with the plan applied: charging as load, discharging as generation."""
    if plan.empty and plan.curtailment_kw is None:
        return series
    charge, discharge = plan.bus_profiles(series.n_buses, series.hours)
    return series.with_adjustments(
        extra_load=charge, extra_generation=discharge, curtailed=plan.curtailment_kw
    )


@dataclass(frozen=True)
class VerificationReport:
    v: np.ndarray  # hours x buses, nonlinear replay
    max_voltage: float
    min_voltage: float
    violations: List[WindowViolation] = field(default_factory=list)
    max_overload_a: float = 0.0
    max_loading: float = 0.0  # peak current over ampacity
    max_linear_gap: Optional[float] = None

    @property
    def worst_excess(self) -> float:
        return max((v.excess for v in self.violations), default=0.0)

    def feasible(self, tol: float = 0.0, overload_tol_a: float = 0.0) -> bool:
        """Voltages within ``tol`` of the band and no cable above its ampacity."""
        return self.worst_excess <= tol and self.max_overload_a <= overload_tol_a


def verify_plan(
    grid: GridNetwork,
    plan: BatteryPlan,
    injections: InjectionSeries,
    limits: Limits,
    *,
    model: Optional[SensitivityModel] = None,
    power_factor: Optional[float] = None,
    slack_v: float = 1.0,
) -> VerificationReport:
    """
    Replay the window through the sweep with the plan's storage and
    curtailment applied. With ``model`` given, also report the largest gap
    between the linear and nonlinear voltages of the replay.
    """
    replay = plan_injections(injections, plan)
    s = replay.pu(grid, power_factor)
    sol = loadflow_series(grid, s, slack_v).require_converged()

    gap: Optional[float] = None
    if model is not None:
        sub = s[:, model.bus_ids]
        v_lin = linear_voltages(model, sub.real, sub.imag)
        gap = float(np.abs(v_lin - sol.v[:, model.bus_ids]).max(initial=0.0))

    over = segment_overloads(grid, sol)
    amp = np.array([grid.segment_ampacity(k) for k in range(len(grid.segments))])
    loading = (over + amp) / amp if over.size else np.zeros(0)
    return VerificationReport(
        v=sol.v,
        max_voltage=float(sol.v.max()),
        min_voltage=float(sol.v.min()),
        violations=screen_series(sol, limits),
        max_overload_a=float(over.max(initial=0.0)),
        max_loading=float(loading.max(initial=0.0)),
        max_linear_gap=gap,
    )
