from pathlib import Path

import numpy as np
import pyarrow as pa
import pyarrow.parquet as pq
import pytest

from grid_planning.battery import BatteryPlan, Placement
from grid_planning.costs import BatteryCostBook, GridCostBook
from grid_planning.network import grid_from_dict
from grid_planning.reinforcement import ReinforcementPlan, candidate_actions
from grid_planning.storage import (
    ReportSchema,
    TableWriter,
    TrajectorySchema,
    format_float,
    read_battery_plan,
    read_reinforcement_plan,
    variant_prefix,
    write_battery_plan,
    write_json,
    write_reinforcement_plan,
    write_trajectories,
)

from tests.grids import feeder_dict, hourly

# test storage


def _lines(path: Path) -> list[str]:
    return [line.replace('"', "") for line in path.read_text(encoding="utf-8").splitlines()]


def test_format_float() -> None:
    assert format_float(1.23456, 3) == "1.235"
    assert format_float(-0.0001, 3) == "0.000"
    assert format_float(float("nan"), 3) == ""
    assert format_float(2.0, 0) == "2"


def test_csv_cells_are_rendered(tmp_path: Path) -> None:
    out = TableWriter(decimals=2, column_decimals={"v": 4}).write_csv(
        {
            "timestamp": hourly(2),
            "bus": np.array([3, 7]),
            "ok": np.array([True, False]),
            "v": np.array([1.0312345, 0.99]),
            "kw": np.array([1.005, -0.0]),
            "note": np.array(["a", None], dtype=object),
        },
        tmp_path / "t" / "table.csv",
    )
    assert _lines(out) == [
        "timestamp,bus,ok,v,kw,note",
        "2019-06-01T00:00:00,3,true,1.0312,1.00,a",
        "2019-06-01T01:00:00,7,false,0.9900,0.00,",
    ]


def test_csv_output_is_byte_stable(tmp_path: Path) -> None:
    cols = {"x": np.linspace(0.0, 1.0, 11), "y": np.arange(11)}
    a = TableWriter().write_csv(cols, tmp_path / "a.csv")
    b = TableWriter().write_csv(cols, tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_rows_and_length_checks(tmp_path: Path) -> None:
    out = TableWriter(decimals=1).write_rows(
        [{"a": 1, "b": 2.25}, {"a": 2}], ["a", "b"], tmp_path / "rows.csv"
    )
    assert _lines(out) == ["a,b", "1,2.2", "2,"]
    with pytest.raises(ValueError, match="differ in length"):
        TableWriter().write_csv({"a": [1, 2], "b": [1]}, tmp_path / "bad.csv")


def test_parquet_roundtrip(tmp_path: Path) -> None:
    out = TableWriter().write_parquet(
        {"timestamp": hourly(3), "v": np.array([1.0, 1.01, 1.02])}, tmp_path / "v.parquet"
    )
    tbl = pq.read_table(out)
    assert tbl.num_rows == 3
    assert tbl.column_names == ["timestamp", "v"]
    assert tbl.schema.field("timestamp").type == pa.timestamp("s")


def test_write_json_is_sorted(tmp_path: Path) -> None:
    out = write_json({"b": 1, "a": [1, 2]}, tmp_path / "doc.json")
    text = out.read_text(encoding="utf-8")
    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"b"')


# ---------------- Schemas ----------------


def test_variant_prefix_and_report_columns() -> None:
    assert variant_prefix("auto") == "battery_auto"
    assert variant_prefix("=5") == "battery_eq5"
    assert variant_prefix("max-3") == "battery_max3"
    schema = ReportSchema(["auto", "=2"])
    assert len(schema.COLUMNS) == len(ReportSchema.BASE_COLUMNS) + 8
    assert list(schema.to_dict()) == schema.COLUMNS
    assert "battery_eq2_capex_keur" in schema.COLUMNS
    assert TrajectorySchema([4]).COLUMNS == ["hour", "timestamp", "bus_4_kw", "bus_4_soc_kwh"]


# ---------------- Plans ----------------


def test_reinforcement_plan_is_repriced_on_read(tmp_path: Path) -> None:
    grid = grid_from_dict(feeder_dict([2], length_km=1.0))
    add = next(a for a in candidate_actions(grid, 1) if a.kind == "add_parallel" and a.n_new == 1)
    plan = ReinforcementPlan.from_actions([add], GridCostBook())
    assert plan.total_capex == pytest.approx(12_500.0)

    path = write_reinforcement_plan(plan, tmp_path / "plan.json")
    same = read_reinforcement_plan(path)
    assert same.total_capex == pytest.approx(12_500.0)
    assert same.actions[0].segment == 1

    # 1 km * 60000 * (0.3 - 0.15)
    dearer = read_reinforcement_plan(path, GridCostBook(parallel_surcharge=0.3))
    assert dearer.total_capex - plan.total_capex == pytest.approx(9_000.0)
    with pytest.raises(FileNotFoundError):
        read_reinforcement_plan(tmp_path / "missing.json")


def test_battery_plan_is_repriced_on_read(tmp_path: Path) -> None:
    plan = BatteryPlan(placements=(Placement(2, 19.0, 10.0),), capex=25_053.0)
    path = write_battery_plan(plan, tmp_path / "batteries.json")
    same = read_battery_plan(path)
    assert same.placements == plan.placements
    assert same.capex == pytest.approx(25_053.0)

    cheaper = read_battery_plan(path, BatteryCostBook(installation_cost=10_000.0))
    assert cheaper.capex == pytest.approx(15_053.0)
    assert cheaper.annual_cost == pytest.approx(1_505.3)


def test_trajectory_table(tmp_path: Path) -> None:
    plan = BatteryPlan(
        placements=(Placement(2, 19.0, 10.0),),
        timestamps=hourly(3),
        charge_kw=np.array([[10.0], [0.0], [0.0]]),
        discharge_kw=np.array([[0.0], [5.0], [0.0]]),
        soc_kwh=np.array([[0.0], [9.5], [4.2368]]),
    )
    out = write_trajectories(plan, tmp_path / "traj.csv")
    assert _lines(out) == [
        "hour,timestamp,bus_2_kw,bus_2_soc_kwh",
        "0,2019-06-01T00:00:00,10.000,0.000",
        "1,2019-06-01T01:00:00,-5.000,9.500",
        "2,2019-06-01T02:00:00,0.000,4.237",
    ]
