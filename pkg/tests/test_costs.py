from __future__ import annotations

import json
from pathlib import Path

import pytest

from grid_planning.costs import (
    BatteryCostBook,
    GridCostBook,
    annualize,
    battery_capex,
    costbook_from_dict,
    costbook_to_dict,
    lcoe,
    lcoes,
    line_capex,
    load_costbook,
)
from grid_planning.network import LineType


def test_battery_capex() -> None:
    assert BatteryCostBook().energy_cost == 217.0
    assert battery_capex(100.0, 50.0) == pytest.approx(46_350.0)
    assert battery_capex(83.0, 40.0) == pytest.approx(41_731.0)
    assert battery_capex(0.0, 0.0) == pytest.approx(20_000.0)
    with pytest.raises(ValueError):
        battery_capex(-1.0, 10.0)


def test_line_capex_new_route_and_shared_trench() -> None:
    assert line_capex("NAYY 4x120 SE", 1.0, 1, shared_trench=False) == pytest.approx(69_900.0)
    assert line_capex("NAYY 4x120 SE", 1.0, 2, shared_trench=False) == pytest.approx(88_800.0)
    assert line_capex("NAYY 4x50 SE", 1.0, 1, shared_trench=False) == pytest.approx(63_500.0)
    assert line_capex("NAYY 4x50 SE", 1.0, 1, shared_trench=True) == pytest.approx(12_500.0)
    assert line_capex("NAYY 4x50 SE", 0.25, 1, shared_trench=True) == pytest.approx(3_125.0)
    with pytest.raises(ValueError):
        line_capex("NAYY 4x50 SE", 1.0, 0, shared_trench=True)
    with pytest.raises(KeyError):
        line_capex("NAYY 4x95 SE", 1.0, 1, shared_trench=False)


def test_annualize() -> None:
    assert annualize(46_350.0, BatteryCostBook().lifetime) == pytest.approx(4_635.0)
    assert annualize(69_900.0, GridCostBook().cable_lifetime) == pytest.approx(1_747.5)
    with pytest.raises(ValueError):
        annualize(1.0, 0.0)


def test_lcoe_undiscounted_and_discounted() -> None:
    assert lcoe(1_000.0, 0.0, 50.0, discount_rate=0.0, years=20) == pytest.approx(1.0)
    # one year at 5 %: (1000 + 100/1.05) / (500/1.05)
    assert lcoe(1_000.0, 100.0, 500.0, discount_rate=0.05, years=1) == pytest.approx(2.3)
    assert lcoe(1_000.0, 0.0, 50.0, discount_rate=0.05) > 1.0
    with pytest.raises(ValueError):
        lcoe(1_000.0, 0.0, 0.0)


def test_lcoes_counts_charging_as_fuel() -> None:
    assert lcoes(46_350.0, 0.0, 500.0, 10_000.0) == pytest.approx(0.5135)
    assert lcoes(46_350.0, 0.0, 0.0, 10_000.0) < lcoes(46_350.0, 0.0, 500.0, 10_000.0)
    with pytest.raises(ValueError):
        lcoes(1.0, 0.0, 0.0, 0.0)


def test_book_validation() -> None:
    with pytest.raises(ValueError):
        BatteryCostBook(installation_cost=-1.0)
    with pytest.raises(ValueError):
        GridCostBook(parallel_surcharge=1.5)


def test_costbook_json(tmp_path: Path) -> None:
    path = tmp_path / "costs.json"
    path.write_text(
        json.dumps(
            {
                "battery": {"installation_cost": 15_000},
                "grid": {
                    "transformer_cost": 25_000,
                    "line_costs": {"NAYY 4x50 SE": {"installation": 50_000, "acquisition": 3_000}},
                },
            }
        ),
        encoding="utf-8",
    )
    battery, grid = load_costbook(path)
    assert battery.installation_cost == 15_000.0
    assert battery.capacity_cost == 130.0
    assert grid.transformer_cost == 25_000.0
    assert grid.line_cost("NAYY 4x50 SE").installation == 50_000.0
    assert grid.line_cost("NAYY 4x120 SE").acquisition == 9_900.0

    again = costbook_from_dict(costbook_to_dict(battery, grid))
    assert again == (battery, grid)


def test_costbook_errors(tmp_path: Path) -> None:
    with pytest.raises(FileNotFoundError):
        load_costbook(tmp_path / "missing.json")
    with pytest.raises(ValueError, match="unknown battery"):
        costbook_from_dict({"battery": {"price": 1.0}})
    assert load_costbook(None) == (BatteryCostBook(), GridCostBook())


def test_covering_prices_unlisted_types() -> None:
    book = GridCostBook()
    extra = LineType("NA2XY 4x240", 0.125, 0.08, 360.0, acquisition_cost=20_000.0)
    covered = book.covering([extra])
    assert covered.line_cost("NA2XY 4x240").acquisition == 20_000.0
    assert covered.line_cost("NA2XY 4x240").installation == 60_000.0
    assert book.covering([]) is book
