from .book import (
    BatteryCostBook,
    GridCostBook,
    LineCost,
    costbook_from_dict,
    costbook_to_dict,
    load_costbook,
)
from .pricing import annualize, battery_capex, lcoe, lcoes, line_capex

__all__ = [
    "BatteryCostBook",
    "GridCostBook",
    "LineCost",
    "costbook_from_dict",
    "costbook_to_dict",
    "load_costbook",
    "annualize",
    "battery_capex",
    "lcoe",
    "lcoes",
    "line_capex",
]
