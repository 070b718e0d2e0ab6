from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

import numpy as np

from grid_planning.battery import BatteryPlan, plan_injections
from grid_planning.powerflow import SeriesSolution, loadflow_series
from grid_planning.reinforcement import ReinforcementPlan
from grid_planning.scenario.runner import ScenarioBundle
from grid_planning.storage import EnvelopeSchema, TableWriter, VoltageSchema

VOLTAGE_DECIMALS = 6

Plan = Union[ReinforcementPlan, BatteryPlan]
TableFormat = Literal["csv", "parquet"]


def replay(bundle: ScenarioBundle, plan: Optional[Plan] = None) -> SeriesSolution:
    """Nonlinear load flow of the window with the plan applied (baseline when None)."""
    if plan is None:
        return bundle.baseline
    cfg = bundle.config
    grid, series = bundle.grid, bundle.window
    if isinstance(plan, ReinforcementPlan):
        grid = plan.apply(grid)
    else:
        series = plan_injections(series, plan)
    return loadflow_series(grid, series.pu(grid, cfg.power_factor), cfg.slack_v).require_converged()


def emit_voltage_profile(
    bundle: ScenarioBundle,
    path: str | Path,
    plan: Optional[Plan] = None,
    table_format: TableFormat = "csv",
) -> Path:
    """
    Wide table: one row per window hour, timestamp then one p.u. column per
    bus. CSV cells carry six decimals; Parquet keeps the full floats.
    """
    sol = replay(bundle, plan)
    schema = VoltageSchema([b.id for b in bundle.grid.buses])
    columns: Dict[str, Any] = {"timestamp": bundle.window.timestamps}
    for b in schema.bus_ids:
        columns[schema.bus_column(b)] = sol.v[:, b]
    writer = TableWriter(decimals=VOLTAGE_DECIMALS)
    if table_format == "parquet":
        return writer.write_parquet(columns, path)
    if table_format != "csv":
        raise ValueError(f"table format must be csv or parquet (got {table_format!r})")
    return writer.write_csv(columns, path)


def emit_envelope(bundle: ScenarioBundle, plan: Plan, path: str | Path) -> Path:
    """Per-hour minimum and maximum voltage before and after the plan."""
    before = bundle.baseline.v
    after = replay(bundle, plan).v
    columns: Dict[str, Any] = {
        "hour": np.arange(bundle.window.hours),
        "timestamp": bundle.window.timestamps,
        "v_min_before": before.min(axis=1),
        "v_max_before": before.max(axis=1),
        "v_min_after": after.min(axis=1),
        "v_max_after": after.max(axis=1),
    }
    if list(columns) != EnvelopeSchema.COLUMNS:
        raise ValueError(f"envelope columns {list(columns)} do not match {EnvelopeSchema.COLUMNS}")
    return TableWriter(decimals=VOLTAGE_DECIMALS).write_csv(columns, path)
