from __future__ import annotations

import json
import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Tuple


@dataclass(frozen=True)
class BatteryCostBook:
    """Battery installation costs for 2019."""

    capacity_cost: float = 130.0  # euro/kWh
    periphery_cost: float = 87.0  # euro/kWh
    power_electronics_cost: float = 93.0  # euro/kW
    installation_cost: float = 20_000.0  # euro per battery
    lifetime: float = 10.0  # years

    def __post_init__(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"battery cost {f.name} must be >= 0")

    @property
    def energy_cost(self) -> float:
        """Capacity-dependent cost per kWh (cells plus periphery)."""
        return self.capacity_cost + self.periphery_cost


@dataclass(frozen=True)
class LineCost:
    installation: float  # euro/km
    acquisition: float  # euro/km


DEFAULT_LINE_COSTS: Mapping[str, LineCost] = {
    "NAYY 4x50 SE": LineCost(60_000.0, 3_500.0),
    "NAYY 4x120 SE": LineCost(60_000.0, 9_900.0),
    "NAYY 4x150 SE": LineCost(60_000.0, 12_000.0),
}


@dataclass(frozen=True)
class GridCostBook:
    """Grid reinforcement costs (0.4 kV cables and the 630 kVA transformer)."""

    line_costs: Mapping[str, LineCost] = field(default_factory=lambda: dict(DEFAULT_LINE_COSTS))
    parallel_surcharge: float = 0.15  # of installation, per added line
    transformer_cost: float = 21_000.0  # euro
    transformer_rating_kva: float = 630.0
    cable_lifetime: float = 40.0  # years
    transformer_lifetime: float = 40.0  # years

    def __post_init__(self) -> None:
        if not 0.0 <= self.parallel_surcharge <= 1.0:
            raise ValueError(
                f"parallel_surcharge must be in [0, 1] (got {self.parallel_surcharge})"
            )
        for name in ("transformer_cost", "cable_lifetime", "transformer_lifetime"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for type_name, lc in self.line_costs.items():
            if lc.installation < 0 or lc.acquisition < 0:
                raise ValueError(f"line costs for {type_name!r} must be >= 0")

    def line_cost(self, type_name: str) -> LineCost:
        try:
            return self.line_costs[type_name]
        except KeyError:
            raise KeyError(f"no cost entry for line type {type_name!r}") from None

    def covering(self, line_types: Iterable[Any]) -> "GridCostBook":
        """Fill in entries for catalog types the book does not price, from the types themselves."""
        missing = {
            lt.name: LineCost(lt.installation_cost, lt.acquisition_cost)
            for lt in line_types
            if lt.name not in self.line_costs
        }
        if not missing:
            return self
        return dataclasses.replace(self, line_costs={**self.line_costs, **missing})


# ---------------- JSON ----------------


def load_costbook(path: str | Path | None = None) -> Tuple[BatteryCostBook, GridCostBook]:
    """
    Read a cost book JSON with optional ``battery`` and ``grid`` objects; missing
    fields keep the embedded defaults.
    """
    if path is None:
        return BatteryCostBook(), GridCostBook()
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"Cost book not found: {p}")
    raw = json.loads(p.read_text(encoding="utf-8"))
    return costbook_from_dict(raw)


def costbook_from_dict(raw: Dict[str, Any]) -> Tuple[BatteryCostBook, GridCostBook]:
    batt_raw = dict(raw.get("battery", {}))
    _reject_unknown(batt_raw, {f.name for f in fields(BatteryCostBook)}, "battery")
    battery = BatteryCostBook(**{k: float(v) for k, v in batt_raw.items()})

    grid_raw = dict(raw.get("grid", {}))
    lines = dict(DEFAULT_LINE_COSTS)
    for name, entry in dict(grid_raw.pop("line_costs", {})).items():
        lines[name] = LineCost(float(entry["installation"]), float(entry["acquisition"]))
    _reject_unknown(grid_raw, {f.name for f in fields(GridCostBook)}, "grid")
    grid = GridCostBook(line_costs=lines, **{k: float(v) for k, v in grid_raw.items()})
    return battery, grid


def costbook_to_dict(battery: BatteryCostBook, grid: GridCostBook) -> Dict[str, Any]:
    return {
        "battery": {f.name: getattr(battery, f.name) for f in fields(battery)},
        "grid": {
            "line_costs": {
                name: {"installation": lc.installation, "acquisition": lc.acquisition}
                for name, lc in sorted(grid.line_costs.items())
            },
            **{
                f.name: getattr(grid, f.name)
                for f in fields(grid)
                if f.name != "line_costs"
            },
        },
    }


def _reject_unknown(raw: Dict[str, Any], known: set[str], section: str) -> None:
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown {section} cost field(s): {sorted(unknown)}")
