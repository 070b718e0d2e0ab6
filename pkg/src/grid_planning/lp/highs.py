"""HiGHS backend through ``scipy.optimize.milp`` with the in-repo result contract."""

from __future__ import annotations

from typing import AbstractSet, Any, Optional

import numpy as np

from grid_planning.lp.model import LinearProgram, Sense, SolverSettings, SolveResult, SolveStatus

_STATUS = {
    0: SolveStatus.OPTIMAL,
    1: SolveStatus.ITERATION_LIMIT,
    2: SolveStatus.INFEASIBLE,
    3: SolveStatus.UNBOUNDED,
}


def _need_scipy_milp() -> Any:
    try:
        from scipy.optimize import milp  # type: ignore[import-not-found]
    except Exception as e:  # noqa: BLE001
        raise RuntimeError(
            "scipy>=1.9 is required for the highs backend. Install with: pip install -e ."
        ) from e
    return milp


def solve_highs(
    lp: LinearProgram,
    integer_vars: AbstractSet[int],
    settings: SolverSettings = SolverSettings(),
    gap_tolerance: Optional[float] = None,
) -> SolveResult:
    milp = _need_scipy_milp()
    from scipy.optimize import Bounds, LinearConstraint

    lo = np.where([s is Sense.LE for s in lp.senses], -np.inf, lp.b)
    hi = np.where([s is Sense.GE for s in lp.senses], np.inf, lp.b)
    integrality = np.zeros(lp.n_vars)
    integrality[list(integer_vars)] = 1
    constraints = [LinearConstraint(lp.a, lo, hi)] if lp.n_rows else []
    options = {
        "mip_rel_gap": settings.gap_tolerance if gap_tolerance is None else gap_tolerance,
        "node_limit": settings.node_limit,
    }
    res = milp(
        lp.c,
        integrality=integrality,
        bounds=Bounds(lp.lb, lp.ub),
        constraints=constraints,
        options=options,
    )
    status = _STATUS.get(res.status, SolveStatus.INFEASIBLE)
    if res.x is None:
        objective = -np.inf if status is SolveStatus.UNBOUNDED else np.inf
        return SolveResult(status, None, objective, np.inf)
    x = np.asarray(res.x, dtype=float)
    if integer_vars:
        idx = list(integer_vars)
        x[idx] = np.round(x[idx])
    gap = float(getattr(res, "mip_gap", 0.0) or 0.0)
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    return SolveResult(status, x, float(res.fun), gap, nodes=nodes)
