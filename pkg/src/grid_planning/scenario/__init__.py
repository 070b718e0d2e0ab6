from .config import CompareConfig, ScenarioConfig, read_scenario
from .runner import (
    ScenarioBundle,
    load_books,
    load_inputs,
    run_scenario,
    solve_batteries,
    solve_reinforcement,
)
from .compare import CellResult, ComparisonReport, cell_label, compare, run_cell
from .profiles import emit_envelope, emit_voltage_profile, replay

__all__ = [
    "CompareConfig",
    "ScenarioConfig",
    "read_scenario",
    "ScenarioBundle",
    "load_books",
    "load_inputs",
    "run_scenario",
    "solve_batteries",
    "solve_reinforcement",
    "CellResult",
    "ComparisonReport",
    "cell_label",
    "compare",
    "run_cell",
    "emit_envelope",
    "emit_voltage_profile",
    "replay",
]
