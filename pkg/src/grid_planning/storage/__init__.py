from .schema import EnvelopeSchema, ReportSchema, TrajectorySchema, VoltageSchema, variant_prefix
from .writer import TableWriter, format_float, write_json
from .plans import (
    read_battery_plan,
    read_reinforcement_plan,
    write_battery_plan,
    write_reinforcement_plan,
    write_trajectories,
)

__all__ = [
    "EnvelopeSchema",
    "ReportSchema",
    "TrajectorySchema",
    "VoltageSchema",
    "variant_prefix",
    "TableWriter",
    "format_float",
    "write_json",
    "read_battery_plan",
    "read_reinforcement_plan",
    "write_battery_plan",
    "write_reinforcement_plan",
    "write_trajectories",
]
