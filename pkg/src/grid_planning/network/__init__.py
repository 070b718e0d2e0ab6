from .model import (
    Bus,
    GridNetwork,
    GridValidationError,
    InjectionSeries,
    LineSegment,
    LineType,
    Transformer,
)
from .topology import BUSBAR_BRANCH, Branch, branch_of, branches, leaves, path_to_slack, validate_grid
from .loader import NAYY_CATALOG, grid_from_dict, grid_to_dict, load_grid, save_grid

__all__ = [
    "Bus",
    "GridNetwork",
    "GridValidationError",
    "InjectionSeries",
    "LineSegment",
    "LineType",
    "Transformer",
    "BUSBAR_BRANCH",
    "Branch",
    "branch_of",
    "branches",
    "leaves",
    "path_to_slack",
    "validate_grid",
    "NAYY_CATALOG",
    "grid_from_dict",
    "grid_to_dict",
    "load_grid",
    "save_grid",
]
