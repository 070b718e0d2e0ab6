from .milp import (
    MilpLayout,
    build_milp,
    candidate_current_rows,
    candidate_voltage_rows,
    linear_plan_voltages,
)
from .placement import (
    DEFAULT_CANDIDATES,
    PlacementInfeasibleError,
    battery_lcoes,
    place_and_verify,
    place_batteries,
    prune_candidates,
    reprice_plan,
)
from .problem import BatteryCount, BatteryPlan, Placement, PlacementProblem, placements_from_dict
from .verify import VerificationReport, plan_injections, verify_plan

__all__ = [
    "MilpLayout",
    "build_milp",
    "candidate_current_rows",
    "candidate_voltage_rows",
    "linear_plan_voltages",
    "DEFAULT_CANDIDATES",
    "PlacementInfeasibleError",
    "battery_lcoes",
    "place_and_verify",
    "place_batteries",
    "prune_candidates",
    "reprice_plan",
    "BatteryCount",
    "BatteryPlan",
    "Placement",
    "PlacementProblem",
    "placements_from_dict",
    "VerificationReport",
    "plan_injections",
    "verify_plan",
]
