from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List

from grid_planning.network.model import (
    Bus,
    GridNetwork,
    GridValidationError,
    LineSegment,
    LineType,
    Transformer,
)
from grid_planning.network.topology import validate_grid

# Standard NAYY low-voltage cables (resistance/reactance per km at 20 °C, ampacity in ground).
NAYY_CATALOG = (
    LineType("NAYY 4x50 SE", r_per_km=0.641, x_per_km=0.083, ampacity=142.0, acquisition_cost=3_500.0),
    LineType("NAYY 4x120 SE", r_per_km=0.253, x_per_km=0.080, ampacity=242.0, acquisition_cost=9_900.0),
    LineType("NAYY 4x150 SE", r_per_km=0.206, x_per_km=0.080, ampacity=270.0, acquisition_cost=12_000.0),
)


def load_grid(path: str | Path) -> GridNetwork:
    """Read a grid JSON file and return a validated radial ``GridNetwork``."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"Grid file not found: {p}")
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise GridValidationError(f"parse error in {p}: {e}") from e
    return grid_from_dict(raw)


def grid_from_dict(raw: Dict[str, Any]) -> GridNetwork:
    for key in ("buses", "segments", "transformer"):
        if key not in raw:
            raise GridValidationError(f"parse error: missing top-level key {key!r}")
    try:
        buses = [
            Bus(
                id=int(b["id"]),
                name=str(b.get("name", f"bus {b['id']}")),
                kind=b.get("kind", "load"),
                v_nominal=float(b.get("v_nominal_v", 400.0)),
            )
            for b in raw["buses"]
        ]
        segments = [
            LineSegment(
                from_bus=int(s["from"]),
                to_bus=int(s["to"]),
                length_km=float(s["length_km"]),
                line_type=str(s["type"]),
                n_parallel=int(s.get("n_parallel", 1)),
            )
            for s in raw["segments"]
        ]
        t = raw["transformer"]
        transformer = Transformer(
            rating_kva=float(t["rating_kva"]),
            lv_bus=int(t["lv_bus"]),
            impedance_ohm=float(t.get("impedance_ohm", 0.0)),
            x_r_ratio=float(t.get("x_r_ratio", 2.0)),
            replacement_cost=(
                None if t.get("replacement_cost_eur") is None else float(t["replacement_cost_eur"])
            ),
        )
        catalog = (
            [
                LineType(
                    name=str(lt["name"]),
                    r_per_km=float(lt["r_per_km"]),
                    x_per_km=float(lt.get("x_per_km", 0.0)),
                    ampacity=float(lt["ampacity"]),
                    acquisition_cost=float(lt.get("acquisition_cost", 0.0)),
                    installation_cost=float(lt.get("installation_cost", 60_000.0)),
                )
                for lt in raw["catalog"]
            ]
            if "catalog" in raw
            else list(NAYY_CATALOG)
        )
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, GridValidationError):
            raise
        raise GridValidationError(f"parse error: {e!r}") from e

    grid = GridNetwork(tuple(buses), tuple(segments), transformer, tuple(catalog))
    validate_grid(grid)
    return grid


def grid_to_dict(grid: GridNetwork) -> Dict[str, Any]:
    t = grid.transformer
    catalog: List[Dict[str, Any]] = [
        {
            "name": lt.name,
            "r_per_km": lt.r_per_km,
            "x_per_km": lt.x_per_km,
            "ampacity": lt.ampacity,
            "acquisition_cost": lt.acquisition_cost,
            "installation_cost": lt.installation_cost,
        }
        for lt in grid.catalog
    ]
    return {
        "buses": [
            {"id": b.id, "name": b.name, "kind": b.kind, "v_nominal_v": b.v_nominal}
            for b in grid.buses
        ],
        "segments": [
            {
                "from": s.from_bus,
                "to": s.to_bus,
                "length_km": s.length_km,
                "type": s.line_type,
                "n_parallel": s.n_parallel,
            }
            for s in grid.segments
        ],
        "transformer": {
            "rating_kva": t.rating_kva,
            "lv_bus": t.lv_bus,
            "impedance_ohm": t.impedance_ohm,
            "x_r_ratio": t.x_r_ratio,
            "replacement_cost_eur": t.replacement_cost,
        },
        "catalog": catalog,
    }


def save_grid(grid: GridNetwork, path: str | Path) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(grid_to_dict(grid), indent=2), encoding="utf-8")
