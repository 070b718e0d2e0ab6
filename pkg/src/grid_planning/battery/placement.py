from __future__ import annotations

import dataclasses
import logging
import math
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np

from grid_planning.battery.milp import (
    CurrentRow,
    MilpLayout,
    VoltageRow,
    build_milp,
    candidate_current_rows,
    candidate_voltage_rows,
    flow_model,
    linear_plan_flows,
    linear_plan_voltages,
)
from grid_planning.battery.problem import (
    CAPACITY_EPS_KWH,
    BatteryPlan,
    Placement,
    PlacementProblem,
    binding_summary,
)
from grid_planning.battery.verify import VerificationReport, verify_plan
from grid_planning.costs import BatteryCostBook, annualize, battery_capex, lcoes
from grid_planning.lp import SolverSettings, SolveStatus, solve_mip
from grid_planning.network import GridNetwork, InjectionSeries
from grid_planning.network.topology import BUSBAR_BRANCH, branch_of, branches
from grid_planning.powerflow import Limits, SensitivityModel, loadflow_series

log = logging.getLogger(__name__)

DEFAULT_CANDIDATES = 15
SCREEN_MARGIN = 0.005  # p.u. inside the limits for the first round of voltage rows
SCREEN_LOADING = 0.95  # share of the admitted flow for the first round of current rows
MAX_ROW_ROUNDS = 25
COMPLEMENTARITY_KW = 1e-4
SIZE_DECIMALS = 3  # plan JSON precision
SIZE_SLACK = 1e-6  # kWh / kW of solver noise not rounded up
REPLAY_TOL = 2e-3  # p.u. the nonlinear replay may exceed a voltage limit by
OVERLOAD_TOL_A = 0.01
TIGHTEN_ROUNDS = 4
TIGHTEN_STEP = 0.98


class PlacementInfeasibleError(RuntimeError):
    def __init__(self, message: str, hours: List[int], buses: List[int]) -> None:
        super().__init__(f"{message} (binding hours {hours}, buses {buses})")
        self.hours = hours
        self.buses = buses


# ---------------- Candidate pruning ----------------


def prune_candidates(
    grid: GridNetwork,
    injections: InjectionSeries,
    limits: Limits,
    k: int = DEFAULT_CANDIDATES,
    *,
    model: Optional[SensitivityModel] = None,
    power_factor: Optional[float] = None,
    slack_v: float = 1.0,
) -> List[int]:
    """
    Buses ranked by sum over violating hours of (worst excess x sensitivity
    of the worst bus to injection here); the top ``k`` followed by the branch
    root of every violating bus. Empty when nothing violates.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1 (got {k})")
    from grid_planning.powerflow import build_sensitivity

    sol = loadflow_series(grid, injections.pu(grid, power_factor), slack_v).require_converged()
    excess = limits.excess(sol.v)
    excess[:, grid.slack.id] = -np.inf
    worst_bus = np.argmax(excess, axis=1)
    worst = excess[np.arange(excess.shape[0]), worst_bus]
    violating = np.flatnonzero(worst > 0)
    if violating.size == 0:
        return []

    model = model or build_sensitivity(grid, slack_v=slack_v)
    score = np.zeros(model.size)
    for t in violating:
        row = model.columns([int(worst_bus[t])])[0]
        score += worst[t] * model.s_p[row]
    order = np.lexsort((model.bus_ids, -score))
    ranked = [int(model.bus_ids[i]) for i in order[:k] if score[i] > 0]

    roots = {br.index: br.root for br in branches(grid)}
    owner = branch_of(grid)
    out = list(ranked)
    bad_buses = sorted({int(b) for b in np.argwhere(excess > 0)[:, 1]})
    for bus in bad_buses:
        idx = owner.get(bus, BUSBAR_BRANCH)
        root = bus if idx == BUSBAR_BRANCH else roots[idx]
        if root not in out:
            out.append(root)
    log.info("[prune] violating-hours=%d candidates=%s", violating.size, out)
    return out


# ---------------- Placement ----------------


def place_batteries(
    problem: PlacementProblem,
    book: BatteryCostBook = BatteryCostBook(),
    settings: SolverSettings = SolverSettings(),
) -> BatteryPlan:
    """
    Solve the placement MILP and decode the plan. Voltage and cable current
    rows enter lazily: the first round carries those near or past a limit
    without storage; rows the incumbent violates are added until none is
    violated.
    """
    lim = problem.row_limits
    all_rows = candidate_voltage_rows(problem)
    base = problem.base_voltages()
    base_excess = problem.limits.excess(base)
    active: Set[VoltageRow] = {
        (t, i, up)
        for t, i, up in all_rows
        if (base[t, i] > lim.v_max - SCREEN_MARGIN if up
            else base[t, i] < lim.v_min + SCREEN_MARGIN)
    }
    flows = flow_model(problem) if problem.enforce_ampacity and problem.grid.segments else None
    all_current: List[CurrentRow] = candidate_current_rows(problem, flows) if flows else []
    active_current: Set[CurrentRow] = set()
    if flows is not None:
        active_current = {
            (t, k, up)
            for t, k, up in all_current
            if abs(flows.base[t, k]) > SCREEN_LOADING * flows.limit[t, k]
        }
    count = problem.count
    if count.mode == "exact" and (count.n or 0) > len(problem.candidate_buses):
        h, b = binding_summary(base_excess, problem.model.bus_ids)
        raise PlacementInfeasibleError(
            f"{count.n} batteries requested but only {len(problem.candidate_buses)} candidate sites",
            h, b,
        )

    for rnd in range(1, MAX_ROW_ROUNDS + 1):
        mip, layout = build_milp(problem, book, active, active_current)
        res = solve_mip(mip, settings)
        log.info(
            "[milp] round=%d vars=%d rows=%d status=%s objective=%.2f gap=%.2e nodes=%d",
            rnd, mip.base.n_vars, mip.base.n_rows, res.status.value, res.objective,
            res.gap, res.nodes,
        )
        if res.status in (SolveStatus.INFEASIBLE, SolveStatus.UNBOUNDED) or res.x is None:
            h, b = binding_summary(base_excess, problem.model.bus_ids)
            raise PlacementInfeasibleError(f"placement MILP {res.status.value}", h, b)

        v = linear_plan_voltages(problem, layout, res.x)
        tol = settings.feasibility_tol * 10
        missing = {
            (t, i, up)
            for t, i, up in all_rows
            if (t, i, up) not in active
            and (v[t, i] > lim.v_max + tol if up else v[t, i] < lim.v_min - tol)
        }
        missing_current: Set[CurrentRow] = set()
        if flows is not None:
            f = linear_plan_flows(problem, layout, res.x, flows)
            missing_current = {
                (t, k, up)
                for t, k, up in all_current
                if (t, k, up) not in active_current
                and (f[t, k] > flows.limit[t, k] + tol if up else f[t, k] < -flows.limit[t, k] - tol)
            }
        if not missing and not missing_current:
            return _decode(problem, layout, res.x, book, res.status, res.gap)
        active |= missing
        active_current |= missing_current
        if rnd == MAX_ROW_ROUNDS - 1:
            active = set(all_rows)
            active_current = set(all_current)

    raise RuntimeError(f"limit rows still missing after {MAX_ROW_ROUNDS} rounds")


def place_and_verify(
    problem: PlacementProblem,
    book: BatteryCostBook = BatteryCostBook(),
    settings: SolverSettings = SolverSettings(),
    *,
    slack_v: float = 1.0,
    tol: float = REPLAY_TOL,
    rounds: int = TIGHTEN_ROUNDS,
) -> Tuple[BatteryPlan, VerificationReport]:
    """
    Place batteries and replay the plan through the sweep. A replay that
    leaves the voltage band or overloads a cable tightens the MILP (voltage
    margin by the worst excess, ampacity by the worst loading) and solves
    again. Raises PlacementInfeasibleError when ``rounds`` are used up.
    """
    report: Optional[VerificationReport] = None
    for rnd in range(1, rounds + 1):
        plan = place_batteries(problem, book, settings)
        report = verify_plan(
            problem.grid,
            plan,
            problem.injections,
            problem.limits,
            model=problem.model,
            power_factor=problem.power_factor,
            slack_v=slack_v,
        )
        if report.feasible(tol, OVERLOAD_TOL_A):
            log.info(
                "[place] replay round=%d v-max=%.4f v-min=%.4f loading=%.3f linear-gap=%.5f",
                rnd, report.max_voltage, report.min_voltage, report.max_loading,
                report.max_linear_gap or 0.0,
            )
            return plan, report

        worst = report.worst_excess
        log.warning(
            "[place] replay round=%d excess=%.5f p.u. overload=%.2f A, tightening",
            rnd, worst, report.max_overload_a,
        )
        changes = {}
        if worst > tol:
            changes["v_margin"] = problem.v_margin + worst
        if report.max_overload_a > OVERLOAD_TOL_A and problem.enforce_ampacity:
            changes["ampacity_factor"] = problem.ampacity_factor * TIGHTEN_STEP / report.max_loading
        if not changes:
            break
        try:
            problem = dataclasses.replace(problem, **changes)
        except ValueError:
            break

    if report is None:
        raise ValueError(f"rounds must be >= 1 (got {rounds})")
    hours = sorted({v.hour for v in report.violations})[:10]
    buses = sorted({v.bus for v in report.violations})[:10]
    raise PlacementInfeasibleError(
        f"nonlinear replay still exceeds limits by {report.worst_excess:.5f} p.u. "
        f"and {report.max_overload_a:.2f} A",
        hours,
        buses,
    )


def _decode(
    problem: PlacementProblem,
    layout: MilpLayout,
    x: np.ndarray,
    book: BatteryCostBook,
    status: SolveStatus,
    gap: float,
) -> BatteryPlan:
    keep = [
        n
        for n in range(len(layout.sites))
        if x[layout.b[n]] > 0.5 and x[layout.capacity[n]] > CAPACITY_EPS_KWH
    ]
    placements = tuple(
        Placement(
            layout.sites[n],
            _round_up(float(x[layout.capacity[n]])),
            _round_up(float(x[layout.power[n]])),
        )
        for n in keep
    )
    # dispatch stays inside the rated sizes
    power = np.array([p.power_kw for p in placements])
    capacity = np.array([p.capacity_kwh for p in placements])
    charge = np.clip(x[layout.charge[keep]].T, 0.0, power) if keep else np.zeros((problem.hours, 0))
    discharge = (
        np.clip(x[layout.discharge[keep]].T, 0.0, power) if keep else np.zeros((problem.hours, 0))
    )
    soc = np.clip(x[layout.soc[keep]].T, 0.0, capacity) if keep else np.zeros((problem.hours, 0))

    both = (charge > COMPLEMENTARITY_KW) & (discharge > COMPLEMENTARITY_KW)
    for t, k in zip(*np.nonzero(both)):
        log.warning(
            "[milp] simultaneous charge and discharge bus=%d hour=%d ch=%.4f dis=%.4f",
            placements[k].bus, t, charge[t, k], discharge[t, k],
        )

    curtailment: Optional[np.ndarray] = None
    curtail_cost = 0.0
    if layout.curtail_buses:
        curtailment = np.zeros((problem.hours, problem.grid.n_buses))
        curtailment[:, list(layout.curtail_buses)] = np.clip(layout.curtailment_kw(x), 0.0, None)
        curtail_cost = float(curtailment.sum() * problem.curtailment_penalty * problem.dt_hours)

    capex = float(sum(battery_capex(p.capacity_kwh, p.power_kw, book) for p in placements))
    plan = BatteryPlan(
        placements=placements,
        timestamps=problem.injections.timestamps.copy(),
        charge_kw=charge,
        discharge_kw=discharge,
        soc_kwh=soc,
        curtailment_kw=curtailment,
        capex=capex,
        annual_cost=annualize(capex, book.lifetime) if capex else 0.0,
        curtailment_cost=curtail_cost,
        proven_optimal=status is SolveStatus.OPTIMAL,
        gap=float(gap),
    )
    log.info(
        "[place] batteries=%d capacity=%.1f kWh capex=%.0f proven=%s",
        plan.count, plan.total_capacity_kwh, plan.capex, plan.proven_optimal,
    )
    return plan


def _round_up(value: float) -> float:
    """Round a size up to the plan precision, ignoring solver noise."""
    scale = 10.0**SIZE_DECIMALS
    return math.ceil(value * scale - SIZE_SLACK * scale) / scale


def reprice_plan(placements: Sequence[Placement], book: BatteryCostBook) -> float:
    return float(sum(battery_capex(p.capacity_kwh, p.power_kw, book) for p in placements))


def battery_lcoes(
    plan: BatteryPlan,
    book: BatteryCostBook = BatteryCostBook(),
    *,
    charging_price: float = 0.0,
    annual_om: float = 0.0,
    discount_rate: float = 0.0,
    dt_hours: float = 1.0,
) -> Optional[float]:
    """
    Levelised cost per discharged kWh of the whole plan, extrapolating the
    window's throughput to a year. None when the plan never discharges.
    """
    hours = plan.discharge_kw.shape[0]
    discharged = float(plan.discharge_kw.sum() * dt_hours)
    if plan.empty or hours == 0 or discharged <= 0:
        return None
    per_year = 8760.0 / (hours * dt_hours)
    charged = float(plan.charge_kw.sum() * dt_hours) * per_year
    return lcoes(
        plan.capex,
        annual_om,
        charged * charging_price,
        discharged * per_year,
        discount_rate,
        int(round(book.lifetime)),
    )
