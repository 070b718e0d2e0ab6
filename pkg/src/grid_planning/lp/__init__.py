from grid_planning.lp.branch_bound import relative_gap, solve_mip
from grid_planning.lp.dump import write_lp
from grid_planning.lp.model import (
    LinearProgram,
    MixedIntegerProgram,
    ProgramBuilder,
    Sense,
    SolverSettings,
    SolveResult,
    SolveStatus,
)
from grid_planning.lp.simplex import solve_lp

__all__ = [
    "LinearProgram",
    "MixedIntegerProgram",
    "ProgramBuilder",
    "Sense",
    "SolveResult",
    "SolveStatus",
    "SolverSettings",
    "relative_gap",
    "solve_lp",
    "solve_mip",
    "write_lp",
]
