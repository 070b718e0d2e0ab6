"""
Greedy branch-by-branch reinforcement.

Per branch: locate the bus with the largest voltage-limit excess over the
window, estimate for every upgrade on its path to the slack how much that
excess shrinks per euro, apply the best one and re-check with the sweep.
Ampacity is repaired once voltages hold; the transformer is replaced last
if it is still overloaded.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Set, Tuple

import numpy as np

from grid_planning.costs import GridCostBook
from grid_planning.network import Branch, GridNetwork, InjectionSeries, branches, path_to_slack
from grid_planning.powerflow import Limits, SeriesSolution, loadflow_series
from grid_planning.powerflow.limits import segment_overloads
from grid_planning.reinforcement.actions import (
    MAX_PARALLEL,
    ReinforcementAction,
    ReinforcementPlan,
    candidate_actions,
)

log = logging.getLogger(__name__)

MAX_LOOP_ITERATIONS = 500


class InfeasibleBranchError(RuntimeError):
    def __init__(self, branch: int, bus: int, violation: float, reason: str) -> None:
        super().__init__(
            f"infeasible branch {branch}: bus {bus} violation={violation:.5f} p.u. ({reason})"
        )
        self.branch = branch
        self.bus = bus
        self.violation = violation


@dataclass(frozen=True)
class CriticalNode:
    bus: int
    violation: float  # p.u.; <= 0 means the branch holds its limits
    hour: int


def _solve(
    grid: GridNetwork, injections: InjectionSeries, power_factor: Optional[float], slack_v: float
) -> SeriesSolution:
    return loadflow_series(grid, injections.pu(grid, power_factor), slack_v).require_converged()


def find_critical_node(
    grid: GridNetwork,
    branch: Branch,
    injections: InjectionSeries,
    limits: Limits,
    *,
    power_factor: Optional[float] = None,
    slack_v: float = 1.0,
    solution: Optional[SeriesSolution] = None,
) -> CriticalNode:
    """Branch bus with the largest limit excess over every window hour (earliest hour, lowest bus on ties)."""
    sol = solution or _solve(grid, injections, power_factor, slack_v)
    buses = np.asarray(branch.buses, dtype=int)
    excess = limits.excess(sol.v[:, buses])
    hour, col = np.unravel_index(int(np.argmax(excess)), excess.shape)
    return CriticalNode(int(buses[col]), float(excess[hour, col]), int(hour))


def _estimated_reduction(
    grid: GridNetwork, action: ReinforcementAction, flow: complex, overvoltage: bool
) -> float:
    """First-order change of the critical voltage excess from the action's impedance change."""
    z_old = grid.segment_impedance_pu(action.segment)
    lt = grid.line_type(action.line_type)
    seg = action.resulting_segment()
    z_new = complex(seg.resistance_ohm(lt), seg.reactance_ohm(lt)) / grid.z_base
    dz = z_new - z_old
    change = dz.real * flow.real + dz.imag * flow.imag
    return change if overvoltage else -change


def _downstream_flows(grid: GridNetwork, injections_pu: np.ndarray) -> np.ndarray:
    """Complex power flowing away from the slack through each segment (p.u., losses ignored)."""
    topo = grid.topology
    s = injections_pu[topo.nonslack]
    per_edge = -(topo.incidence @ s)
    return per_edge[topo.segment_edges()]


def _pick(
    scored: List[Tuple[float, ReinforcementAction]], path: List[int]
) -> ReinforcementAction:
    depth = {seg: i for i, seg in enumerate(path)}
    # best ratio, then lowest capex, then closest to the slack
    scored.sort(key=lambda sa: (-sa[0], sa[1].capex, depth[sa[1].segment], sa[1].key))
    return scored[0][1]


def reinforce_branch(
    grid: GridNetwork,
    branch: Branch,
    injections: InjectionSeries,
    limits: Limits,
    book: GridCostBook = GridCostBook(),
    *,
    power_factor: Optional[float] = None,
    slack_v: float = 1.0,
    max_parallel: int = MAX_PARALLEL,
) -> List[ReinforcementAction]:
    """
    Upgrade the branch until every bus holds ``limits`` and every segment its
    ampacity over the window. Raises ``InfeasibleBranchError`` when no
    remaining action improves the critical bus.
    """
    actions: List[ReinforcementAction] = []
    current = grid

    for _ in range(MAX_LOOP_ITERATIONS):
        sol = _solve(current, injections, power_factor, slack_v)
        crit = find_critical_node(current, branch, injections, limits, solution=sol)
        if crit.violation > 0:
            current = _fix_voltage_step(
                current, branch, crit, sol, injections, limits, book, actions,
                power_factor=power_factor, slack_v=slack_v, max_parallel=max_parallel,
            )
            continue

        overloads = segment_overloads(current, sol)
        hot = [k for k in branch.segments if overloads[k] > 0]
        if not hot:
            return actions
        peak = sol.line_currents.max(axis=0)
        for k in hot:
            fixes = [
                a
                for a in candidate_actions(current, k, book)
                if a.n_parallel <= max_parallel
                and a.resulting_segment().ampacity(current.line_type(a.line_type)) >= peak[k]
            ]
            if not fixes:
                raise InfeasibleBranchError(
                    branch.index, current.segments[k].to_bus, float(overloads[k]),
                    f"segment {k} current {peak[k]:.1f} A exceeds every upgrade",
                )
            fix = min(fixes, key=lambda a: (a.capex, a.key))
            log.info(
                "[reinforce] branch=%d ampacity segment=%d current=%.1f action=%s type=%s n=%d",
                branch.index, k, peak[k], fix.kind, fix.line_type, fix.n_parallel,
            )
            current = fix.apply(current)
            actions.append(fix)

    raise InfeasibleBranchError(branch.index, -1, float("nan"), "iteration cap reached")


def _fix_voltage_step(
    current: GridNetwork,
    branch: Branch,
    crit: CriticalNode,
    sol: SeriesSolution,
    injections: InjectionSeries,
    limits: Limits,
    book: GridCostBook,
    actions: List[ReinforcementAction],
    *,
    power_factor: Optional[float],
    slack_v: float,
    max_parallel: int,
) -> GridNetwork:
    """Apply the single best voltage action for the current critical bus, with rollback."""
    overvoltage = bool(sol.v[crit.hour, crit.bus] > limits.v_max)
    path = [k for k in path_to_slack(current, crit.bus) if k in set(branch.segments)]
    inj_pu = injections.pu(current, power_factor)
    flows = _downstream_flows(current, inj_pu[crit.hour])
    excluded: Set[Tuple[int, str, str, int]] = set()

    while True:
        scored: List[Tuple[float, ReinforcementAction]] = []
        for k in path:
            for a in candidate_actions(current, k, book):
                if a.n_parallel > max_parallel or a.key in excluded:
                    continue
                gain = _estimated_reduction(current, a, complex(flows[k]), overvoltage)
                if gain > 0:
                    scored.append((gain / max(a.capex, 1e-9), a))
        if not scored:
            raise InfeasibleBranchError(
                branch.index, crit.bus, crit.violation, "no remaining action lowers the violation"
            )
        action = _pick(scored, path)
        trial = action.apply(current)
        trial_sol = _solve(trial, injections, power_factor, slack_v)
        after = float(limits.excess(trial_sol.v[:, crit.bus]).max())
        if after < crit.violation:
            log.info(
                "[reinforce] branch=%d iter=%d bus=%d violation=%.5f -> %.5f action=%s "
                "segment=%d type=%s n=%d cost=%.0f",
                branch.index, len(actions) + 1, crit.bus, crit.violation, after,
                action.kind, action.segment, action.line_type, action.n_parallel, action.capex,
            )
            actions.append(action)
            return trial
        log.debug(
            "[reinforce] branch=%d rollback segment=%d action=%s violation=%.5f",
            branch.index, action.segment, action.kind, after,
        )
        excluded.add(action.key)


# ---------------- Grid ----------------


def _replacement_rating(grid: GridNetwork, book: GridCostBook) -> float:
    rating = grid.transformer.rating_kva
    return book.transformer_rating_kva if book.transformer_rating_kva > rating else 2.0 * rating


def reinforce_grid(
    grid: GridNetwork,
    injections: InjectionSeries,
    limits: Limits,
    book: GridCostBook = GridCostBook(),
    *,
    power_factor: Optional[float] = None,
    slack_v: float = 1.0,
    max_parallel: int = MAX_PARALLEL,
    workers: int = 1,
) -> ReinforcementPlan:
    """
    Reinforce every branch (concurrently when ``workers`` > 1), merge in
    branch order, re-run branches that the merge left violating, then check
    the transformer and verify the reinforced grid over the whole window.
    """
    book = book.covering(grid.catalog)
    brs = branches(grid)
    kwargs = dict(power_factor=power_factor, slack_v=slack_v, max_parallel=max_parallel)

    def run(br: Branch) -> List[ReinforcementAction]:
        return reinforce_branch(grid, br, injections, limits, book, **kwargs)  # type: ignore[arg-type]

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        per_branch = list(pool.map(run, brs))

    actions: List[ReinforcementAction] = [a for acts in per_branch for a in acts]
    merged = grid
    for a in actions:
        merged = a.apply(merged)

    # branches share the transformer, so a merged grid can still violate
    for br in brs:
        extra = reinforce_branch(merged, br, injections, limits, book, **kwargs)  # type: ignore[arg-type]
        for a in extra:
            merged = a.apply(merged)
        actions.extend(extra)

    sol = _solve(merged, injections, power_factor, slack_v)
    new_rating: Optional[float] = None
    peak_loading = float(sol.transformer_loading.max(initial=0.0))
    if peak_loading > 1.0:
        new_rating = _replacement_rating(merged, book)
        log.info(
            "[reinforce] transformer loading=%.3f replaced rating=%.0f kVA",
            peak_loading, new_rating,
        )
        merged = merged.with_transformer(
            dataclasses.replace(merged.transformer, rating_kva=new_rating)
        )
        sol = _solve(merged, injections, power_factor, slack_v)

    _verify(merged, sol, limits)
    plan = ReinforcementPlan.from_actions(
        actions, book, new_rating, sol.v.max(axis=1), grid.transformer.replacement_cost
    )
    log.info(
        "[reinforce] actions=%d branches=%d capex=%.0f annual=%.0f",
        len(plan.actions),
        len({br.index for br in brs for a in plan.actions if a.segment in br.segments}),
        plan.total_capex,
        plan.annual_cost,
    )
    return plan


def _verify(grid: GridNetwork, sol: SeriesSolution, limits: Limits) -> None:
    worst = float(limits.excess(sol.v).max(initial=-np.inf))
    over = segment_overloads(grid, sol)
    if worst > 0 or (over.size and over.max() > 0):
        raise RuntimeError(
            f"reinforced grid still violates limits (voltage excess {worst:.5f} p.u., "
            f"max overload {float(over.max(initial=0.0)):.1f} A)"
        )
