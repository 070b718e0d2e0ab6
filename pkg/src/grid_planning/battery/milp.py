"""
Placement MILP on the linear voltage model.

Per candidate site n: binary b, capacity C, power P. Per site and hour t:
charge ch, discharge dis, state of charge E. Optional curtailment u per
PV bus and hour. Storage is cyclic over the window.

Cable currents enter as active power flow rows: the flow through a segment
is the sum of the injections below it, and the ampacity allows
sqrt((I_max * v_min)^2 - Q^2) of it at the lowest admissible voltage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from grid_planning.battery.problem import PlacementProblem
from grid_planning.costs import BatteryCostBook
from grid_planning.lp import MixedIntegerProgram, ProgramBuilder, Sense

# (hour, model column, upper?) of one voltage limit row
VoltageRow = Tuple[int, int, bool]
# (hour, segment, toward the slack?) of one cable current row
CurrentRow = Tuple[int, int, bool]


@dataclass(frozen=True)
class MilpLayout:
    """Variable indices of a built placement MILP."""

    sites: Tuple[int, ...]
    b: np.ndarray  # (sites,)
    capacity: np.ndarray
    power: np.ndarray
    charge: np.ndarray  # (sites, hours)
    discharge: np.ndarray
    soc: np.ndarray
    curtail_buses: Tuple[int, ...]
    curtail: np.ndarray  # (curtail buses, hours)
    voltage_rows: Tuple[VoltageRow, ...]
    current_rows: Tuple[CurrentRow, ...] = ()

    def battery_injection_kw(self, x: np.ndarray) -> np.ndarray:
        """Net storage injection dis - ch per site (hours x sites)."""
        return (x[self.discharge] - x[self.charge]).T

    def curtailment_kw(self, x: np.ndarray) -> np.ndarray:
        if not self.curtail_buses:
            return np.zeros((self.charge.shape[1], 0))
        return x[self.curtail].T


@dataclass(frozen=True)
class FlowModel:
    """Linear active flow per cable segment, positive toward the slack (p.u.)."""

    below: np.ndarray  # (segments, model buses), 1 where the bus is fed through the segment
    base: np.ndarray  # (hours, segments) without storage
    limit: np.ndarray  # (hours, segments) flow the ampacity admits

    def per_kw(self, problem: PlacementProblem, buses: Iterable[int]) -> np.ndarray:
        """Flow change per kW injected at ``buses`` (segments x len(buses))."""
        cols = problem.model.columns(list(buses))
        return self.below[:, cols] / problem.grid.s_base_kva


def _sensitivity_columns(problem: PlacementProblem, buses: Iterable[int]) -> np.ndarray:
    """s_p rows for injection at ``buses`` (len(buses) x model size), per kW."""
    cols = problem.model.columns(list(buses))
    return problem.model.s_p[cols] / problem.grid.s_base_kva


def curtailable_buses(problem: PlacementProblem) -> Tuple[int, ...]:
    if not problem.allow_curtailment:
        return ()
    gen = problem.injections.generation
    model_buses = {int(b) for b in problem.model.bus_ids}
    return tuple(int(b) for b in np.flatnonzero(gen.max(axis=0) > 0) if int(b) in model_buses)


def flow_model(problem: PlacementProblem) -> FlowModel:
    grid = problem.grid
    topo = grid.topology
    if not np.array_equal(topo.nonslack, problem.model.bus_ids):
        raise ValueError("sensitivity model does not cover the grid's non-slack buses")
    below = topo.incidence[topo.segment_edges()] if grid.segments else np.zeros((0, topo.nonslack.size))
    s = problem.injections.pu(grid, problem.power_factor)[:, topo.nonslack]
    base = s.real @ below.T
    q = s.imag @ below.T
    amp = np.array([grid.segment_ampacity(k) for k in range(len(grid.segments))])
    s_max = problem.ampacity_factor * amp / grid.i_base * problem.row_limits.v_min
    limit = np.sqrt(np.clip(s_max**2 - q**2, 0.0, None))
    return FlowModel(below, base, limit)


def candidate_voltage_rows(problem: PlacementProblem) -> List[VoltageRow]:
    """
    Voltage limit rows that can bind: a row is dropped when even the extreme
    storage (and curtailment) action allowed by the variable bounds cannot
    push the voltage past its limit.
    """
    base = problem.base_voltages()
    site_sens = _sensitivity_columns(problem, problem.candidate_buses)  # (sites, n)
    reach_up = problem.p_max * site_sens.sum(axis=0)  # max rise from discharging
    reach_down = np.broadcast_to(reach_up, base.shape).copy()  # max drop from charging
    cb = curtailable_buses(problem)
    if cb:
        gen = problem.injections.generation[:, list(cb)]  # (hours, cb)
        reach_down += gen @ _sensitivity_columns(problem, cb)

    lim = problem.row_limits
    rows: List[VoltageRow] = []
    for t in range(base.shape[0]):
        for i in range(base.shape[1]):
            if base[t, i] + reach_up[i] > lim.v_max:
                rows.append((t, i, True))
            if base[t, i] - reach_down[t, i] < lim.v_min:
                rows.append((t, i, False))
    return rows


def candidate_current_rows(
    problem: PlacementProblem, flows: Optional[FlowModel] = None
) -> List[CurrentRow]:
    """Cable current rows that can bind, in the same sense as the voltage rows."""
    if not problem.enforce_ampacity or not problem.grid.segments:
        return []
    fm = flows or flow_model(problem)
    reach = problem.p_max * fm.per_kw(problem, problem.candidate_buses).sum(axis=1)
    reach_down = np.broadcast_to(reach, fm.base.shape).copy()
    cb = curtailable_buses(problem)
    if cb:
        gen = problem.injections.generation[:, list(cb)]
        reach_down += gen @ fm.per_kw(problem, cb).T
    up = fm.base + reach > fm.limit
    down = fm.base - reach_down < -fm.limit
    rows = [(int(t), int(k), True) for t, k in zip(*np.nonzero(up))]
    rows += [(int(t), int(k), False) for t, k in zip(*np.nonzero(down))]
    return sorted(rows)


def build_milp(
    problem: PlacementProblem,
    book: BatteryCostBook = BatteryCostBook(),
    voltage_rows: Optional[Iterable[VoltageRow]] = None,
    current_rows: Optional[Iterable[CurrentRow]] = None,
) -> Tuple[MixedIntegerProgram, MilpLayout]:
    """
    Assemble the placement MILP. ``voltage_rows`` and ``current_rows``
    restrict the limit constraints to a subset (default: every row that can
    bind).
    """
    hours = problem.hours
    sites = problem.candidate_buses
    dt = problem.dt_hours
    eta_c, eta_d = problem.charge_efficiency, problem.discharge_efficiency
    throughput = problem.throughput_cost * dt
    pb = ProgramBuilder()

    b = np.empty(len(sites), dtype=int)
    cap = np.empty(len(sites), dtype=int)
    pwr = np.empty(len(sites), dtype=int)
    for n, bus in enumerate(sites):
        b[n] = pb.add_var(f"b_{bus}", 0.0, 1.0, book.installation_cost, binary=True)
        cap[n] = pb.add_var(f"C_{bus}", 0.0, problem.c_max, book.energy_cost)
        pwr[n] = pb.add_var(f"P_{bus}", 0.0, problem.p_max, book.power_electronics_cost)

    ch = np.empty((len(sites), hours), dtype=int)
    dis = np.empty((len(sites), hours), dtype=int)
    soc = np.empty((len(sites), hours), dtype=int)
    for n, bus in enumerate(sites):
        for t in range(hours):
            ch[n, t] = pb.add_var(f"ch_{bus}_{t}", cost=throughput)
            dis[n, t] = pb.add_var(f"dis_{bus}_{t}", cost=throughput)
            soc[n, t] = pb.add_var(f"E_{bus}_{t}")

    cb = curtailable_buses(problem)
    curt = np.empty((len(cb), hours), dtype=int)
    gen = problem.injections.generation
    for j, bus in enumerate(cb):
        for t in range(hours):
            curt[j, t] = pb.add_var(
                f"u_{bus}_{t}", 0.0, float(gen[t, bus]), problem.curtailment_penalty * dt
            )

    # ---------------- storage ----------------
    for n in range(len(sites)):
        for t in range(hours):
            nxt = (t + 1) % hours
            if nxt == t:
                pb.add_row([ch[n, t], dis[n, t]], [dt * eta_c, -dt / eta_d], Sense.EQ, 0.0)
            else:
                pb.add_row(
                    [soc[n, nxt], soc[n, t], ch[n, t], dis[n, t]],
                    [1.0, -1.0, -dt * eta_c, dt / eta_d],
                    Sense.EQ,
                    0.0,
                )
            pb.add_row([soc[n, t], cap[n]], [1.0, -1.0], Sense.LE, 0.0)
            pb.add_row([ch[n, t], pwr[n]], [1.0, -1.0], Sense.LE, 0.0)
            pb.add_row([dis[n, t], pwr[n]], [1.0, -1.0], Sense.LE, 0.0)
        pb.add_row([cap[n], b[n]], [1.0, -problem.c_max], Sense.LE, 0.0)
        pb.add_row([pwr[n], b[n]], [1.0, -problem.p_max], Sense.LE, 0.0)
        if problem.c_min > 0:
            pb.add_row([cap[n], b[n]], [1.0, -problem.c_min], Sense.GE, 0.0)

    if problem.max_batteries is not None:
        pb.add_row(b, np.ones(len(sites)), Sense.LE, float(problem.max_batteries))
    if problem.exact_batteries is not None:
        pb.add_row(b, np.ones(len(sites)), Sense.EQ, float(problem.exact_batteries))

    # ---------------- voltage ----------------
    rows = candidate_voltage_rows(problem) if voltage_rows is None else sorted(set(voltage_rows))
    base = problem.base_voltages()
    site_sens = _sensitivity_columns(problem, sites)
    curt_sens = _sensitivity_columns(problem, cb) if cb else np.zeros((0, site_sens.shape[1]))
    lim = problem.row_limits
    for t, i, upper in rows:
        cols = list(dis[:, t]) + list(ch[:, t]) + list(curt[:, t])
        vals = list(site_sens[:, i]) + list(-site_sens[:, i]) + list(-curt_sens[:, i])
        if upper:
            pb.add_row(cols, vals, Sense.LE, lim.v_max - base[t, i])
        else:
            pb.add_row(cols, vals, Sense.GE, lim.v_min - base[t, i])

    # ---------------- current ----------------
    crows: List[CurrentRow] = []
    if problem.enforce_ampacity and problem.grid.segments:
        fm = flow_model(problem)
        crows = (
            candidate_current_rows(problem, fm)
            if current_rows is None
            else sorted(set(current_rows))
        )
        site_flow = fm.per_kw(problem, sites)
        curt_flow = fm.per_kw(problem, cb) if cb else np.zeros((fm.below.shape[0], 0))
        for t, k, upper in crows:
            cols = list(dis[:, t]) + list(ch[:, t]) + list(curt[:, t])
            vals = list(site_flow[k]) + list(-site_flow[k]) + list(-curt_flow[k])
            if upper:
                pb.add_row(cols, vals, Sense.LE, fm.limit[t, k] - fm.base[t, k])
            else:
                pb.add_row(cols, vals, Sense.GE, -fm.limit[t, k] - fm.base[t, k])

    layout = MilpLayout(
        sites=tuple(sites),
        b=b,
        capacity=cap,
        power=pwr,
        charge=ch,
        discharge=dis,
        soc=soc,
        curtail_buses=cb,
        curtail=curt,
        voltage_rows=tuple(rows),
        current_rows=tuple(crows),
    )
    return pb.build(), layout


def linear_plan_voltages(
    problem: PlacementProblem, layout: MilpLayout, x: np.ndarray
) -> np.ndarray:
    """Linear-model voltages with the solution's storage and curtailment applied (hours x model buses)."""
    v = problem.base_voltages()
    v = v + layout.battery_injection_kw(x) @ _sensitivity_columns(problem, layout.sites)
    if layout.curtail_buses:
        v = v - layout.curtailment_kw(x) @ _sensitivity_columns(problem, layout.curtail_buses)
    return v


def linear_plan_flows(
    problem: PlacementProblem, layout: MilpLayout, x: np.ndarray, flows: FlowModel
) -> np.ndarray:
    """Linear segment flows with the solution applied (hours x segments, p.u.)."""
    f = flows.base + layout.battery_injection_kw(x) @ flows.per_kw(problem, layout.sites).T
    if layout.curtail_buses:
        f = f - layout.curtailment_kw(x) @ flows.per_kw(problem, layout.curtail_buses).T
    return f
