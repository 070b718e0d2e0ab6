"""Scenario execution: injections, worst window, baseline and the two planners."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from grid_planning.battery import (
    BatteryCount,
    BatteryPlan,
    PlacementProblem,
    place_and_verify,
    prune_candidates,
)
from grid_planning.costs import BatteryCostBook, GridCostBook, load_costbook
from grid_planning.ingestion import IngestConfig, ProfileIngestor
from grid_planning.lp import SolverSettings
from grid_planning.network import GridNetwork, InjectionSeries, load_grid
from grid_planning.powerflow import (
    Limits,
    SensitivityModel,
    SeriesSolution,
    build_sensitivity,
    loadflow_series,
)
from grid_planning.powerflow.limits import WindowViolation, screen_series, segment_overloads
from grid_planning.pv import select_worst_window
from grid_planning.reinforcement import ReinforcementPlan, reinforce_grid
from grid_planning.scenario.config import ScenarioConfig

log = logging.getLogger(__name__)

FEASIBILITY_SLACK = 2e-3  # p.u. allowed on the nonlinear replay of a battery plan


@dataclass(frozen=True)
class ScenarioBundle:
    config: ScenarioConfig
    grid: GridNetwork
    series: InjectionSeries  # whole record, generation at the scenario penetration
    window: InjectionSeries
    window_start: int
    limits: Limits
    baseline: SeriesSolution
    violations: Tuple[WindowViolation, ...]
    overloaded_segments: Tuple[int, ...]
    model: SensitivityModel

    @property
    def has_violations(self) -> bool:
        return bool(self.violations) or bool(self.overloaded_segments)

    def envelope(self) -> Tuple[np.ndarray, np.ndarray]:
        """Per-hour minimum and maximum bus voltage of the baseline window."""
        return self.baseline.v.min(axis=1), self.baseline.v.max(axis=1)


# ---------------- Inputs ----------------


def load_inputs(config: ScenarioConfig) -> Tuple[GridNetwork, InjectionSeries]:
    """Grid and injections at full rooftop potential."""
    grid = load_grid(config.grid)
    series = ProfileIngestor().ingest(
        IngestConfig(
            grid=grid,
            injections=config.injections,
            irradiance=config.irradiance,
            roofs=config.roofs,
            load_profile=config.load_profile,
            pv_params=config.pv,
            latitude=config.latitude,
            longitude=config.longitude,
        )
    )
    return grid, series


def load_books(config: ScenarioConfig) -> Tuple[BatteryCostBook, GridCostBook]:
    return load_costbook(config.costs)


# ---------------- Scenario ----------------


def run_scenario(
    config: ScenarioConfig,
    *,
    grid: Optional[GridNetwork] = None,
    injections: Optional[InjectionSeries] = None,
) -> ScenarioBundle:
    """
    Scale generation to the penetration, cut the worst window, run the
    baseline load flow and screen it. ``grid``/``injections`` skip reading
    the files (full-potential injections expected).
    """
    if grid is None or injections is None:
        loaded_grid, loaded_series = load_inputs(config)
        grid = loaded_grid if grid is None else grid
        injections = loaded_series if injections is None else injections
    if injections.n_buses != grid.n_buses:
        raise ValueError(f"injections cover {injections.n_buses} buses, grid has {grid.n_buses}")

    series = injections.scaled_generation(config.pv_penetration)
    hours = min(config.window_hours, series.hours)
    start = select_worst_window(series.net_kw().sum(axis=1), hours)
    window = series.window(start, hours)

    limits = Limits.from_deviation(config.v_deviation_limit)
    s = window.pu(grid, config.power_factor)
    baseline = loadflow_series(grid, s, config.slack_v).require_converged()
    violations = tuple(screen_series(baseline, limits))
    overloaded = tuple(int(k) for k in np.flatnonzero(segment_overloads(grid, baseline) > 0))

    if config.linearization == "peak":
        peak = int(np.argmax(window.net_kw().sum(axis=1)))
        model = build_sensitivity(grid, s[peak], config.slack_v)
    else:
        model = build_sensitivity(grid, None, config.slack_v)

    log.info(
        "[scenario] penetration=%.2f limit=%.3f window-start=%s hours=%d violations=%d "
        "overloads=%d v-max=%.4f v-min=%.4f",
        config.pv_penetration,
        config.v_deviation_limit,
        window.timestamps[0] if window.hours else "-",
        window.hours,
        len(violations),
        len(overloaded),
        float(baseline.v.max()),
        float(baseline.v.min()),
    )
    return ScenarioBundle(
        config=config,
        grid=grid,
        series=series,
        window=window,
        window_start=start,
        limits=limits,
        baseline=baseline,
        violations=violations,
        overloaded_segments=overloaded,
        model=model,
    )


# ---------------- Planners ----------------


def solve_reinforcement(
    bundle: ScenarioBundle, book: GridCostBook = GridCostBook(), workers: int = 1
) -> ReinforcementPlan:
    if not bundle.has_violations:
        return ReinforcementPlan.from_actions([], book, final_max_voltage=bundle.envelope()[1])
    cfg = bundle.config
    return reinforce_grid(
        bundle.grid,
        bundle.window,
        bundle.limits,
        book,
        power_factor=cfg.power_factor,
        slack_v=cfg.slack_v,
        workers=workers,
    )


def solve_batteries(
    bundle: ScenarioBundle,
    count: Optional[BatteryCount] = None,
    book: BatteryCostBook = BatteryCostBook(),
) -> BatteryPlan:
    """
    Prune candidate sites, solve the placement MILP and replay the plan
    nonlinearly. A plan whose replay still leaves the band or overloads a
    cable after tightening raises PlacementInfeasibleError.
    """
    cfg = bundle.config
    count = cfg.batteries if count is None else count
    if not bundle.violations:
        return _empty_plan(bundle)

    k = cfg.candidate_k
    if count.mode == "exact" and count.n is not None:
        k = max(k, count.n)
    candidates = prune_candidates(
        bundle.grid,
        bundle.window,
        bundle.limits,
        k,
        model=bundle.model,
        power_factor=cfg.power_factor,
        slack_v=cfg.slack_v,
    )
    problem = PlacementProblem(
        grid=bundle.grid,
        model=bundle.model,
        injections=bundle.window,
        limits=bundle.limits,
        candidate_buses=tuple(candidates),
        count=count,
        allow_curtailment=cfg.allow_curtailment,
        power_factor=cfg.power_factor,
    )
    plan, _ = place_and_verify(
        problem,
        book,
        SolverSettings(backend=cfg.solver),
        slack_v=cfg.slack_v,
        tol=FEASIBILITY_SLACK,
    )
    return plan


def _empty_plan(bundle: ScenarioBundle) -> BatteryPlan:
    hours = bundle.window.hours
    return BatteryPlan(
        timestamps=bundle.window.timestamps.copy(),
        charge_kw=np.zeros((hours, 0)),
        discharge_kw=np.zeros((hours, 0)),
        soc_kwh=np.zeros((hours, 0)),
    )
