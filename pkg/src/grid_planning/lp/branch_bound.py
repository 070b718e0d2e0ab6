from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from grid_planning.lp.model import (
    MixedIntegerProgram,
    SolverSettings,
    SolveResult,
    SolveStatus,
)
from grid_planning.lp.simplex import solve_lp

log = logging.getLogger(__name__)


def relative_gap(incumbent: float, bound: float) -> float:
    if not np.isfinite(incumbent):
        return np.inf
    return max(0.0, (incumbent - bound) / max(1.0, abs(incumbent)))


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    lb: np.ndarray = field(compare=False)
    ub: np.ndarray = field(compare=False)
    x: np.ndarray = field(compare=False)


def solve_mip(
    mip: MixedIntegerProgram,
    settings: SolverSettings = SolverSettings(),
    gap_tolerance: Optional[float] = None,
    node_limit: Optional[int] = None,
) -> SolveResult:
    """
    Best-first branch and bound over binary variables.

    Nodes are ordered by LP bound, then creation order. The most fractional
    binary is branched on (lowest index on ties), down child first. At the
    node limit, or when a node LP stops at its iteration limit, the incumbent
    is returned with status ``ITERATION_LIMIT`` and its gap against the best
    open or unsettled bound.
    """
    if settings.backend == "highs":
        from grid_planning.lp.highs import solve_highs

        return solve_highs(mip.base, mip.integer_vars, settings, gap_tolerance)

    gap_tol = settings.gap_tolerance if gap_tolerance is None else gap_tolerance
    limit = settings.node_limit if node_limit is None else node_limit
    base = mip.base
    ints = np.array(sorted(mip.integer_vars), dtype=int)
    itol = settings.integrality_tol

    root = solve_lp(base, settings)
    iterations = root.iterations
    if root.status is not SolveStatus.OPTIMAL:
        return SolveResult(root.status, root.x, root.objective, np.inf, iterations, 1)

    inc_x: Optional[np.ndarray] = None
    inc_obj = np.inf
    open_nodes: List[_Node] = []
    seq = 0
    nodes = 1

    def fractionality(x: np.ndarray) -> np.ndarray:
        if ints.size == 0:
            return np.zeros(0)
        v = x[ints]
        return np.minimum(v - np.floor(v), np.ceil(v) - v)

    def offer(res: SolveResult, lb: np.ndarray, ub: np.ndarray) -> None:
        nonlocal inc_x, inc_obj, seq
        assert res.x is not None
        frac = fractionality(res.x)
        if frac.size == 0 or frac.max() <= itol:
            if res.objective < inc_obj:
                x = res.x.copy()
                x[ints] = np.round(x[ints])
                inc_x, inc_obj = x, res.objective
                log.debug("[milp] incumbent=%.6f nodes=%d", inc_obj, nodes)
            return
        if res.objective < inc_obj:
            heapq.heappush(open_nodes, _Node(res.objective, seq, lb, ub, res.x))
            seq += 1

    offer(root, base.lb.copy(), base.ub.copy())
    hit_limit = False
    unproven = False
    lost_bound = np.inf  # parent bound of children the LP could not settle
    while open_nodes:
        node = open_nodes[0]
        if relative_gap(inc_obj, node.bound) <= gap_tol:
            break
        if nodes >= limit:
            hit_limit = True
            break
        heapq.heappop(open_nodes)

        frac = fractionality(node.x)
        k = int(np.argmax(frac))
        j = int(ints[k])
        value = node.x[j]
        for lo, hi in ((node.lb[j], np.floor(value)), (np.ceil(value), node.ub[j])):
            if lo > hi:
                continue
            lb = node.lb.copy()
            ub = node.ub.copy()
            lb[j], ub[j] = lo, hi
            res = solve_lp(base.with_bounds(lb, ub), settings)
            nodes += 1
            iterations += res.iterations
            if res.status is SolveStatus.OPTIMAL:
                offer(res, lb, ub)
            elif res.status is SolveStatus.ITERATION_LIMIT:
                unproven = True
                lost_bound = min(lost_bound, node.bound)
                log.warning("[milp] node LP hit the iteration limit bound=%.6f", node.bound)

    best_bound = min([n.bound for n in open_nodes], default=inc_obj)
    best_bound = min(best_bound, inc_obj, lost_bound)
    log.info(
        "[milp] nodes=%d incumbent=%s gap=%s",
        nodes,
        f"{inc_obj:.6f}" if inc_x is not None else "none",
        f"{relative_gap(inc_obj, best_bound):.2e}" if inc_x is not None else "inf",
    )
    if inc_x is None:
        status = SolveStatus.ITERATION_LIMIT if (hit_limit or unproven) else SolveStatus.INFEASIBLE
        return SolveResult(status, None, np.inf, np.inf, iterations, nodes)

    gap = relative_gap(inc_obj, best_bound)
    status = SolveStatus.OPTIMAL
    if (unproven or hit_limit) and gap > gap_tol:
        status = SolveStatus.ITERATION_LIMIT
    return SolveResult(status, inc_x, float(inc_obj), gap, iterations, nodes)
