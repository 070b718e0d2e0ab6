"""Plan JSON documents and the battery trajectory table."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from grid_planning.battery import BatteryPlan, placements_from_dict, reprice_plan
from grid_planning.costs import BatteryCostBook, GridCostBook, annualize
from grid_planning.reinforcement import ReinforcementPlan
from grid_planning.storage.schema import TrajectorySchema
from grid_planning.storage.writer import TableWriter, write_json


def _read_doc(path: str | Path) -> Dict[str, Any]:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"Plan not found: {p}")
    raw = json.loads(p.read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ValueError(f"{p}: expected a JSON object")
    return raw


def write_reinforcement_plan(plan: ReinforcementPlan, path: str | Path) -> Path:
    return write_json(plan.to_dict(), path)


def read_reinforcement_plan(
    path: str | Path,
    book: GridCostBook = GridCostBook(),
    transformer_cost: Optional[float] = None,
) -> ReinforcementPlan:
    """
    Reload a plan; costs are recomputed from ``book`` (a transformer
    replacement at ``transformer_cost`` when given), not taken from the file.
    """
    return ReinforcementPlan.from_dict(_read_doc(path), book).reprice(book, transformer_cost)


def write_battery_plan(plan: BatteryPlan, path: str | Path) -> Path:
    return write_json(plan.to_dict(), path)


def read_battery_plan(path: str | Path, book: BatteryCostBook = BatteryCostBook()) -> BatteryPlan:
    """Placements with capex re-priced from ``book``; dispatch is not part of the document."""
    raw = _read_doc(path)
    placements = tuple(placements_from_dict(raw))
    capex = reprice_plan(placements, book)
    return BatteryPlan(
        placements=placements,
        capex=capex,
        annual_cost=annualize(capex, book.lifetime) if capex else 0.0,
        curtailment_cost=float(raw.get("curtailment_cost_eur", 0.0)),
        proven_optimal=bool(raw.get("proven_optimal", True)),
        gap=float(raw.get("gap", 0.0)),
    )


def write_trajectories(plan: BatteryPlan, path: str | Path) -> Path:
    """Hourly net charge (kW, + charging) and state of charge (kWh) per battery."""
    buses = [p.bus for p in plan.placements]
    schema = TrajectorySchema(buses)
    hours = plan.charge_kw.shape[0]
    columns: Dict[str, Any] = {
        "hour": np.arange(hours),
        "timestamp": plan.timestamps[:hours],
    }
    net = plan.trajectories
    for k, b in enumerate(buses):
        columns[f"bus_{b}_kw"] = net[:, k]
        columns[f"bus_{b}_soc_kwh"] = plan.soc_kwh[:, k]
    if list(columns) != schema.COLUMNS:
        raise ValueError(f"trajectory columns {list(columns)} do not match {schema.COLUMNS}")
    return TableWriter(decimals=3).write_csv(columns, path)
