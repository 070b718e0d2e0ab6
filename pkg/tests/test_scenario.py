from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pyarrow.parquet as pq
import pytest

from grid_planning.battery import BatteryCount, PlacementProblem, place_and_verify, prune_candidates
from grid_planning.network import grid_from_dict
from grid_planning.network.synth import SyntheticCase
from grid_planning.powerflow import Limits, build_sensitivity
from grid_planning.reinforcement import reinforce_grid
from grid_planning.scenario import (
    CellResult,
    ComparisonReport,
    CompareConfig,
    ScenarioConfig,
    cell_label,
    compare,
    emit_envelope,
    emit_voltage_profile,
    read_scenario,
    replay,
    run_scenario,
    solve_batteries,
    solve_reinforcement,
)
from grid_planning.storage import EnvelopeSchema

from tests.grids import feeder_dict, leaf_pv_series, write_case


def _lines(path: Path) -> list[str]:
    return [line.replace('"', "") for line in path.read_text(encoding="utf-8").splitlines()]


@pytest.fixture
def case_file(tmp_path: Path) -> Path:
    return write_case(tmp_path / "case")


# ---------------- Config ----------------


def test_read_scenario_resolves_relative_paths(case_file: Path) -> None:
    cfg, matrix = read_scenario(case_file)
    assert cfg.grid == case_file.parent / "grid.json"
    assert cfg.injections == case_file.parent / "injections.csv"
    assert cfg.window_hours == 24
    assert cfg.candidate_k == 2
    assert cfg.batteries == BatteryCount()
    assert matrix == CompareConfig()


def test_scenario_rejects_unknown_and_out_of_range(tmp_path: Path) -> None:
    with pytest.raises(ValueError, match="unknown scenario field"):
        ScenarioConfig.from_dict({"grid": "g.json", "injections": "i.csv", "colour": "red"})
    with pytest.raises(ValueError, match="pv_penetration"):
        ScenarioConfig(Path("g.json"), Path("i.csv"), pv_penetration=1.5)
    with pytest.raises(ValueError, match="injections"):
        ScenarioConfig(Path("g.json"))
    with pytest.raises(FileNotFoundError):
        read_scenario(tmp_path / "nope.json")


def test_scenario_dict_and_overrides() -> None:
    cfg = ScenarioConfig.from_dict(
        {"grid": "g.json", "injections": "i.csv", "batteries": "max-3", "pv": {"usable_fraction": 0.6}}
    )
    assert cfg.batteries == BatteryCount("max", 3)
    assert cfg.pv.usable_fraction == 0.6
    doc = cfg.to_dict()
    assert doc["batteries"] == "max-3"
    assert doc["grid"] == "g.json"
    changed = cfg.with_overrides(pv_penetration=0.8, solver=None)
    assert changed.pv_penetration == 0.8
    assert changed.solver == "simplex"


def test_compare_config() -> None:
    matrix = CompareConfig(penetrations=(0.5, 0.8), limits=(0.03,), variants=("auto", "=2"))
    assert matrix.cells == ((0.5, 0.03), (0.8, 0.03))
    assert [c.label for c in matrix.counts] == ["auto", "=2"]
    with pytest.raises(ValueError, match="duplicate"):
        CompareConfig(variants=("auto", "auto"))
    with pytest.raises(ValueError):
        CompareConfig(variants=("lots",))
    assert cell_label(0.5, 0.03) == "p50_v3"
    assert cell_label(0.8, 0.05) == "p80_v5"


# ---------------- Runner ----------------


def test_half_penetration_holds_three_percent(case_file: Path) -> None:
    cfg, _ = read_scenario(case_file)
    bundle = run_scenario(cfg)
    assert bundle.window.hours == 24
    assert not bundle.has_violations
    plan = solve_reinforcement(bundle)
    assert plan.empty and plan.total_capex == 0.0
    assert solve_batteries(bundle).empty


def test_high_penetration_violates_at_the_leaf(case_file: Path) -> None:
    cfg, _ = read_scenario(case_file)
    bundle = run_scenario(cfg.with_overrides(pv_penetration=0.8))
    assert bundle.has_violations
    assert {v.bus for v in bundle.violations} >= {5}
    assert all(10 <= v.hour % 24 <= 14 for v in bundle.violations)
    vmin, vmax = bundle.envelope()
    assert vmax.max() > 1.03 and vmin.shape == (24,)


def test_both_planners_clear_the_window(case_file: Path) -> None:
    cfg, _ = read_scenario(case_file)
    bundle = run_scenario(cfg.with_overrides(pv_penetration=0.8))

    reinforcement = solve_reinforcement(bundle)
    assert not reinforcement.empty
    assert replay(bundle, reinforcement).v.max() <= 1.03 + 1e-9

    batteries = solve_batteries(bundle)
    assert batteries.count >= 1
    assert all(p.bus in (2, 3, 4, 5) for p in batteries.placements)
    assert replay(bundle, batteries).v.max() <= 1.03 + 2e-3


def test_peak_linearization(case_file: Path) -> None:
    cfg, _ = read_scenario(case_file)
    bundle = run_scenario(cfg.with_overrides(pv_penetration=0.8, linearization="peak"))
    assert bundle.model.v0.max() > 1.03


# ---------------- Profiles ----------------


def test_voltage_profile_and_envelope(case_file: Path, tmp_path: Path) -> None:
    cfg, _ = read_scenario(case_file)
    bundle = run_scenario(cfg.with_overrides(pv_penetration=0.8))
    a = emit_voltage_profile(bundle, tmp_path / "a.csv")
    b = emit_voltage_profile(bundle, tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()

    lines = _lines(a)
    assert lines[0] == "timestamp," + ",".join(f"bus_{i}" for i in range(6))
    assert len(lines) == 25
    first = lines[1].split(",")
    assert first[1] == "1.000000"  # slack
    assert float(first[-1]) == pytest.approx(bundle.baseline.v[0, 5], abs=1e-6)

    plan = solve_reinforcement(bundle)
    env = _lines(emit_envelope(bundle, plan, tmp_path / "env.csv"))
    assert env[0] == "hour,timestamp,v_min_before,v_max_before,v_min_after,v_max_after"
    noon = env[1 + 12].split(",")
    assert float(noon[3]) > 1.03 >= float(noon[5])


def test_profile_formats_and_schema_guard(
    case_file: Path, tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    cfg, _ = read_scenario(case_file)
    bundle = run_scenario(cfg)
    out = emit_voltage_profile(bundle, tmp_path / "v.parquet", table_format="parquet")
    table = pq.read_table(out)
    assert table.num_rows == 24
    np.testing.assert_array_equal(table.column("bus_5").to_numpy(), bundle.baseline.v[:, 5])
    with pytest.raises(ValueError, match="table format"):
        emit_voltage_profile(bundle, tmp_path / "v.xlsx", table_format="xlsx")  # type: ignore[arg-type]

    monkeypatch.setattr(EnvelopeSchema, "COLUMNS", ["hour", "v_max_after"])
    with pytest.raises(ValueError, match="envelope columns"):
        emit_envelope(bundle, solve_reinforcement(bundle), tmp_path / "env.csv")
    assert not (tmp_path / "env.csv").exists()


# ---------------- Compare ----------------


def test_compare_matrix(case_file: Path, tmp_path: Path) -> None:
    cfg, _ = read_scenario(case_file)
    matrix = CompareConfig(penetrations=(0.5, 0.8), limits=(0.03,), variants=("auto", "=2"))
    report = compare(cfg, matrix, workers=2)
    assert report.failed_cells == []
    statuses = {(c.penetration, c.v_limit): c.status for c in report.cells}
    assert statuses == {(0.5, 0.03): "no-violations", (0.8, 0.03): "ok"}

    hot = report.cells[1]
    assert hot.reinforcement is not None and hot.reinforcement.total_capex > 0
    assert hot.batteries["=2"].count == 2
    assert hot.batteries["auto"].capex <= hot.batteries["=2"].capex
    assert set(hot.envelopes) == {"baseline", "reinforcement", "battery_auto", "battery_eq2"}

    written = report.write(tmp_path / "out")
    names = {p.name for p in written}
    assert {"report.csv", "report.json", "reinforcement_p80_v3.json", "batteries_p80_v3_eq2.json"} <= names

    rows = _lines(tmp_path / "out" / "report.csv")
    assert rows[0].split(",") == report.schema.COLUMNS
    assert len(rows) == 3
    assert rows[1].split(",")[:3] == ["0.50", "0.030", "no-violations"]

    doc = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
    assert [c["cell"] for c in doc["cells"]] == ["p50_v3", "p80_v3"]
    assert len(doc["cells"][1]["envelopes"]["baseline"]["v_max"]) == 24


def test_compare_records_failures(case_file: Path) -> None:
    cfg, _ = read_scenario(case_file)
    # four buses can host a battery, five are requested
    matrix = CompareConfig(penetrations=(0.8,), limits=(0.03,), variants=("auto", "=5"))
    report = compare(cfg, matrix)
    (cell,) = report.cells
    assert cell.status == "failed"
    assert set(cell.errors) == {"=5"}
    assert "auto" in cell.batteries
    assert report.failed_cells == [cell]
    assert np.isfinite(cell.reinforcement.total_capex)


def test_compare_output_is_byte_identical(case_file: Path, tmp_path: Path) -> None:
    cfg, _ = read_scenario(case_file)
    matrix = CompareConfig(penetrations=(0.5, 0.8), limits=(0.03, 0.05), variants=("auto", "=2"))
    outs = []
    for run, workers in enumerate((1, 4, 4)):
        out = tmp_path / f"run{run}"
        compare(cfg, matrix, workers=workers).write(out)
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir())
    assert "report.csv" in names
    for out in outs[1:]:
        assert sorted(p.name for p in out.iterdir()) == names
        for name in names:
            assert (out / name).read_bytes() == (outs[0] / name).read_bytes(), name


# ---------------- Planner patterns ----------------


@pytest.fixture(scope="module")
def synthetic_report(synthetic_case: SyntheticCase) -> ComparisonReport:
    cfg = ScenarioConfig(Path("grid.json"), Path("injections.csv"), window_hours=24, solver="highs")
    matrix = CompareConfig(penetrations=(0.5, 0.8), limits=(0.05, 0.03), variants=("auto", "=5", "=10"))
    return compare(
        cfg, matrix, grid=synthetic_case.grid, injections=synthetic_case.injections, workers=2
    )


def _cell(report: ComparisonReport, penetration: float, v_limit: float) -> CellResult:
    (cell,) = [c for c in report.cells if (c.penetration, c.v_limit) == (penetration, v_limit)]
    return cell


def test_synthetic_matrix_solves_every_cell(synthetic_report: ComparisonReport) -> None:
    assert synthetic_report.failed_cells == []
    assert _cell(synthetic_report, 0.8, 0.03).status == "ok"


def test_variant_capex_ordering(synthetic_report: ComparisonReport) -> None:
    for cell in synthetic_report.cells:
        auto, five, ten = (cell.batteries[label] for label in ("auto", "=5", "=10"))
        if cell.status == "no-violations":
            assert auto.empty and five.empty and ten.empty
            continue
        assert (five.count, ten.count) == (5, 10)
        # auto minimises capex plus a small throughput charge
        assert auto.capex <= five.capex + 100.0
        assert five.capex <= ten.capex


@pytest.mark.parametrize(
    "looser,tighter",
    [
        ((0.5, 0.05), (0.5, 0.03)),
        ((0.8, 0.05), (0.8, 0.03)),
        ((0.5, 0.05), (0.8, 0.05)),
        ((0.5, 0.03), (0.8, 0.03)),
    ],
)
def test_storage_never_shrinks_under_harder_conditions(
    synthetic_report: ComparisonReport, looser: tuple, tighter: tuple
) -> None:
    easy = _cell(synthetic_report, *looser).batteries["auto"]
    hard = _cell(synthetic_report, *tighter).batteries["auto"]
    assert hard.count >= easy.count
    assert hard.total_capacity_kwh >= easy.total_capacity_kwh


def test_batteries_undercut_reinforcement_on_a_long_cable() -> None:
    # one 5 km NAYY 4x150 cable, the largest type: only a parallel cable helps
    raw = feeder_dict([1], length_km=5.0)
    raw["segments"][0]["type"] = "NAYY 4x150 SE"
    grid = grid_from_dict(raw)
    window = leaf_pv_series(grid, pv_bus=2, hours=24, pv_kw=5.2, leaf_load_kw=0.2)
    limits = Limits.from_deviation(0.03)

    reinforcement = reinforce_grid(grid, window, limits)
    assert [a.kind for a in reinforcement.actions] == ["add_parallel"]
    assert reinforcement.total_capex == pytest.approx(105_000.0)
    assert reinforcement.annual_cost == pytest.approx(2_625.0)

    model = build_sensitivity(grid)
    candidates = prune_candidates(grid, window, limits, model=model)
    plan, report = place_and_verify(PlacementProblem(grid, model, window, limits, tuple(candidates)))
    assert plan.count == 1
    assert report.feasible(2e-3)
    assert plan.capex < reinforcement.total_capex
    assert plan.annual_cost < reinforcement.annual_cost
