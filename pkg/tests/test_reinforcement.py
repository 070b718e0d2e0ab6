from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from grid_planning.costs import GridCostBook
from grid_planning.network import GridNetwork, branches, grid_from_dict, grid_to_dict, path_to_slack
from grid_planning.powerflow import Limits, loadflow_series
from grid_planning.reinforcement import (
    InfeasibleBranchError,
    ReinforcementPlan,
    candidate_actions,
    find_critical_node,
    reinforce_branch,
    reinforce_grid,
    upgrade_everything_cost,
)

from tests.grids import feeder_dict, leaf_pv_series

LIMITS = Limits.from_deviation(0.03)


def _max_voltage(grid: GridNetwork, plan: ReinforcementPlan, pv_bus: int, pv_kw: float = 40.0) -> float:
    reinforced = plan.apply(grid)
    inj = leaf_pv_series(reinforced, pv_bus, pv_kw=pv_kw)
    return float(loadflow_series(reinforced, inj.pu(reinforced)).require_converged().v.max())


# ---------------- Actions ----------------


def test_candidate_actions_for_a_one_km_cable() -> None:
    grid = grid_from_dict(feeder_dict([1], length_km=1.0))
    actions = candidate_actions(grid, 0)
    by_key = {(a.kind, a.line_type, a.n_parallel): a for a in actions}
    assert by_key[("replace", "NAYY 4x120 SE", 1)].capex == pytest.approx(69_900.0)
    assert by_key[("add_parallel", "NAYY 4x50 SE", 2)].capex == pytest.approx(12_500.0)
    assert by_key[("add_parallel", "NAYY 4x50 SE", 3)].n_new == 2
    assert not any(a.kind == "replace" and a.line_type == "NAYY 4x50 SE" for a in actions)

    before = grid.segments[0].resistance_ohm(grid.line_type("NAYY 4x50 SE"))
    for a in actions:
        after = a.resulting_segment().resistance_ohm(grid.line_type(a.line_type))
        assert after < before
    with pytest.raises(KeyError):
        candidate_actions(grid, 5)


def test_upgrade_everything_cost() -> None:
    grid = grid_from_dict(feeder_dict([4]))
    # 0.1 km each of 4x150: 0.1 * (60000 + 12000)
    assert upgrade_everything_cost(grid, [0, 1, 2, 3]) == pytest.approx(4 * 7_200.0)


# ---------------- Heuristic ----------------


def test_critical_node_is_the_leaf(leaf_pv_grid: GridNetwork) -> None:
    (branch,) = branches(leaf_pv_grid)
    crit = find_critical_node(leaf_pv_grid, branch, leaf_pv_series(leaf_pv_grid, 5), LIMITS)
    assert crit.bus == 5
    assert crit.hour == 10
    assert crit.violation > 0


def test_reinforced_leaf_feeder_holds_the_limit(leaf_pv_grid: GridNetwork) -> None:
    inj = leaf_pv_series(leaf_pv_grid, 5)
    plan = reinforce_grid(leaf_pv_grid, inj, LIMITS)
    assert not plan.empty
    assert not plan.transformer_replaced
    assert _max_voltage(leaf_pv_grid, plan, 5) <= 1.03 + 1e-9
    assert plan.total_capex <= upgrade_everything_cost(leaf_pv_grid, path_to_slack(leaf_pv_grid, 5))
    assert plan.total_capex == pytest.approx(sum(a.capex for a in plan.actions))
    assert plan.annual_cost == pytest.approx(plan.total_capex / 40.0)
    assert plan.final_max_voltage.shape == (48,)
    assert all(a.n_parallel <= 3 for a in plan.actions)


def test_only_the_violating_branch_is_touched() -> None:
    grid = grid_from_dict(feeder_dict([4, 3]))
    plan = reinforce_grid(grid, leaf_pv_series(grid, 5), LIMITS, workers=2)
    first, _ = branches(grid)
    assert plan.touched_segments()
    assert set(plan.touched_segments()) <= set(first.segments)


def test_no_violation_gives_an_empty_plan(leaf_pv_grid: GridNetwork) -> None:
    plan = reinforce_grid(leaf_pv_grid, leaf_pv_series(leaf_pv_grid, 5, pv_kw=5.0), LIMITS)
    assert plan.empty
    assert plan.total_capex == 0.0
    assert plan.annual_cost == 0.0


def test_ampacity_is_repaired_with_parallel_cables() -> None:
    grid = grid_from_dict(feeder_dict([4], length_km=0.01))
    inj = leaf_pv_series(grid, 5, pv_kw=120.0)
    (branch,) = branches(grid)
    actions = reinforce_branch(grid, branch, inj, LIMITS)
    assert sorted(a.segment for a in actions) == [0, 1, 2, 3]
    assert all(a.kind == "add_parallel" and a.n_parallel == 2 for a in actions)


def test_parallel_cap_can_leave_a_branch_infeasible(leaf_pv_grid: GridNetwork) -> None:
    (branch,) = branches(leaf_pv_grid)
    inj = leaf_pv_series(leaf_pv_grid, 5, pv_kw=120.0)
    with pytest.raises(InfeasibleBranchError) as info:
        reinforce_branch(leaf_pv_grid, branch, inj, LIMITS, max_parallel=1)
    assert info.value.bus == 5
    assert info.value.branch == 0


# ---------------- Plan ----------------


def test_plan_reprice_and_round_trip(leaf_pv_grid: GridNetwork) -> None:
    book = GridCostBook()
    plan = reinforce_grid(leaf_pv_grid, leaf_pv_series(leaf_pv_grid, 5), LIMITS, book)

    again = ReinforcementPlan.from_dict(plan.to_dict(), book)
    assert again.total_capex == pytest.approx(plan.total_capex, abs=0.01)
    assert again.touched_segments() == plan.touched_segments()
    np.testing.assert_allclose(again.final_max_voltage, plan.final_max_voltage, atol=1e-6)

    dearer = dataclasses.replace(book, parallel_surcharge=0.3)
    repriced = plan.reprice(dearer)
    expected = sum(
        a.reprice(dearer) for a in plan.actions
    )
    assert repriced.total_capex == pytest.approx(expected)
    added = [a for a in plan.actions if a.kind == "add_parallel"]
    if added:
        assert repriced.total_capex > plan.total_capex


def test_transformer_replacement_is_priced() -> None:
    book = GridCostBook()
    plan = ReinforcementPlan.from_actions([], book, transformer_rating_kva=1260.0)
    assert plan.transformer_replaced
    assert plan.total_capex == pytest.approx(21_000.0)
    assert plan.annual_cost == pytest.approx(525.0)
    grid = grid_from_dict(feeder_dict([2]))
    assert plan.apply(grid).transformer.rating_kva == 1260.0


def test_grid_transformer_price_overrides_the_book() -> None:
    # 40 kW of PV behind a 20 kVA transformer: voltages hold, the unit is overloaded
    raw = feeder_dict([1])
    raw["transformer"].update(rating_kva=20.0, replacement_cost_eur=30_000.0)
    grid = grid_from_dict(raw)
    assert grid.transformer.replacement_cost == 30_000.0
    assert grid_to_dict(grid)["transformer"]["replacement_cost_eur"] == 30_000.0

    plan = reinforce_grid(grid, leaf_pv_series(grid, pv_bus=2, hours=24), LIMITS)
    assert plan.transformer_replaced and not plan.actions
    assert plan.transformer_rating_kva == 630.0
    assert plan.total_capex == pytest.approx(30_000.0)
    assert plan.annual_cost == pytest.approx(750.0)
    assert plan.reprice(GridCostBook()).total_capex == pytest.approx(21_000.0)
    assert plan.reprice(GridCostBook(), 30_000.0).total_capex == pytest.approx(30_000.0)

    # without a grid price the book decides
    del raw["transformer"]["replacement_cost_eur"]
    plain = grid_from_dict(raw)
    assert plain.transformer.replacement_cost is None
    book = GridCostBook(transformer_cost=25_000.0)
    plan = reinforce_grid(plain, leaf_pv_series(plain, pv_bus=2, hours=24), LIMITS, book)
    assert plan.total_capex == pytest.approx(25_000.0)
