from __future__ import annotations

import json
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from grid_planning.network import (
    BUSBAR_BRANCH,
    GridValidationError,
    InjectionSeries,
    branch_of,
    branches,
    grid_from_dict,
    grid_to_dict,
    leaves,
    load_grid,
    path_to_slack,
    save_grid,
)
from grid_planning.network.synth import synthesize_feeder

from tests.grids import feeder_dict, hourly, pu_chain


def _write(path: Path, doc: dict) -> Path:
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_load_three_bus_feeder(tmp_path: Path) -> None:
    raw = feeder_dict([1])  # slack, busbar, one cable bus
    grid = load_grid(_write(tmp_path / "grid.json", raw))
    assert grid.n_buses == 3
    assert len(grid.segments) == 1
    assert grid.slack.id == 0
    assert grid.transformer.lv_bus == 1


def test_loop_is_rejected(tmp_path: Path) -> None:
    raw = feeder_dict([3])
    raw["segments"].append({"from": 4, "to": 1, "length_km": 0.05, "type": "NAYY 4x50 SE"})
    with pytest.raises(GridValidationError, match="non-radial topology"):
        load_grid(_write(tmp_path / "loop.json", raw))


def test_unknown_line_type_is_rejected() -> None:
    raw = feeder_dict([2])
    raw["segments"][1]["type"] = "NAYY 4x95 SE"
    with pytest.raises(GridValidationError, match="unknown line type"):
        grid_from_dict(raw)


def test_duplicate_bus_id_is_rejected() -> None:
    raw = feeder_dict([2])
    raw["buses"][3]["id"] = 2
    with pytest.raises(GridValidationError, match="duplicate bus id"):
        grid_from_dict(raw)


def test_parse_error_and_missing_file(tmp_path: Path) -> None:
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(GridValidationError, match="parse error"):
        load_grid(bad)
    with pytest.raises(FileNotFoundError):
        load_grid(tmp_path / "missing.json")


def test_catalog_ordering_is_checked() -> None:
    raw = feeder_dict([1])
    raw["catalog"] = [
        {"name": "a", "r_per_km": 0.6, "ampacity": 150.0},
        {"name": "b", "r_per_km": 0.3, "ampacity": 120.0},
    ]
    raw["segments"][0]["type"] = "a"
    with pytest.raises(GridValidationError, match="catalog ordering"):
        grid_from_dict(raw)


def test_save_and_reload(tmp_path: Path) -> None:
    grid = grid_from_dict(feeder_dict([2, 3]))
    save_grid(grid, tmp_path / "out" / "grid.json")
    again = load_grid(tmp_path / "out" / "grid.json")
    assert grid_to_dict(again) == grid_to_dict(grid)


# ---------------- Topology ----------------


def test_star_has_one_branch_per_feeder() -> None:
    grid = grid_from_dict(feeder_dict([2, 3, 1]))
    brs = branches(grid)
    assert [br.root for br in brs] == [2, 4, 7]
    assert [br.buses for br in brs] == [(2, 3), (4, 5, 6), (7,)]
    owner = branch_of(grid)
    assert owner[1] == BUSBAR_BRANCH
    assert all(owner[b] == br.index for br in brs for b in br.buses)
    assert sorted(owner) == [b.id for b in grid.buses if b.id != grid.slack.id]


def test_every_bus_below_the_busbar_has_one_branch() -> None:
    # transformer not modelled: the slack feeds the branches directly
    chain = pu_chain(3, 0.01)
    assert branch_of(chain) == {1: 0, 2: 0, 3: 0}

    grid = grid_from_dict(feeder_dict([2, 3]))
    owner = branch_of(grid)
    assert [b for b, idx in owner.items() if idx == BUSBAR_BRANCH] == [grid.transformer.lv_bus]
    below = [b for br in branches(grid) for b in br.buses]
    assert len(below) == len(set(below)) == grid.n_buses - 2


def test_chain_is_a_single_branch() -> None:
    grid = grid_from_dict(feeder_dict([5]))
    (br,) = branches(grid)
    assert br.buses == (2, 3, 4, 5, 6)
    assert leaves(grid) == [6]


def test_path_to_slack() -> None:
    grid = grid_from_dict(feeder_dict([4]))
    assert path_to_slack(grid, 0) == []
    assert path_to_slack(grid, 1) == []  # transformer only
    assert path_to_slack(grid, 5) == [0, 1, 2, 3]
    with pytest.raises(KeyError):
        path_to_slack(grid, 42)


def test_synthetic_feeder_branches_and_paths() -> None:
    grid = synthesize_feeder(106, 4, seed=0)
    assert grid.n_buses == 106
    assert len(grid.segments) == 105
    assert len(branches(grid)) == 4

    graph = nx.Graph()
    for k, seg in enumerate(grid.segments):
        graph.add_edge(seg.from_bus, seg.to_bus, segment=k)
    rng = np.random.default_rng(3)
    for bus in rng.integers(2, 106, size=10):
        nodes = nx.shortest_path(graph, 1, int(bus))
        expected = [graph.edges[u, v]["segment"] for u, v in zip(nodes, nodes[1:])]
        assert path_to_slack(grid, int(bus)) == expected


# ---------------- Injections ----------------


def test_injection_series_checks_spacing_and_sign() -> None:
    ts = hourly(3)
    ok = InjectionSeries(ts, np.ones((3, 2)), np.zeros((3, 2)))
    assert ok.hours == 3
    assert ok.net_kw()[0, 0] == -1.0

    gap = ts.copy()
    gap[2] = gap[1] + np.timedelta64(2, "h")
    with pytest.raises(ValueError, match="hourly"):
        InjectionSeries(gap, np.ones((3, 2)), np.zeros((3, 2)))
    with pytest.raises(ValueError, match=">= 0"):
        InjectionSeries(ts, -np.ones((3, 2)), np.zeros((3, 2)))


def test_window_and_adjustments() -> None:
    ts = hourly(6)
    series = InjectionSeries(ts, np.ones((6, 2)), np.full((6, 2), 4.0))
    w = series.window(2, 3)
    assert w.hours == 3
    assert w.timestamps[0] == ts[2]
    assert series.scaled_generation(0.5).generation.max() == 2.0

    adj = w.with_adjustments(
        extra_load=np.full((3, 2), 1.0), extra_generation=None, curtailed=np.full((3, 2), 5.0)
    )
    assert adj.load.max() == 2.0
    assert adj.generation.min() == 0.0  # clipped
    with pytest.raises(ValueError):
        series.window(5, 3)
