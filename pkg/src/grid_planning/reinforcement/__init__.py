from .actions import (
    MAX_PARALLEL,
    ReinforcementAction,
    ReinforcementPlan,
    candidate_actions,
    upgrade_everything_cost,
)
from .heuristic import (
    CriticalNode,
    InfeasibleBranchError,
    find_critical_node,
    reinforce_branch,
    reinforce_grid,
)

__all__ = [
    "MAX_PARALLEL",
    "ReinforcementAction",
    "ReinforcementPlan",
    "candidate_actions",
    "upgrade_everything_cost",
    "CriticalNode",
    "InfeasibleBranchError",
    "find_critical_node",
    "reinforce_branch",
    "reinforce_grid",
]
