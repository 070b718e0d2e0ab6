from .solar import (
    IrradianceRecord,
    clear_sky,
    declination,
    equation_of_time,
    poa_irradiance,
    sun_position,
)
from .system import (
    PvSystemParams,
    RoofSpec,
    bus_capacities,
    generation_profile,
    max_pv_capacity,
    pv_power,
    scale_penetration,
)
from .window import DEFAULT_WINDOW_HOURS, select_worst_window

__all__ = [
    "IrradianceRecord",
    "clear_sky",
    "declination",
    "equation_of_time",
    "poa_irradiance",
    "sun_position",
    "PvSystemParams",
    "RoofSpec",
    "bus_capacities",
    "generation_profile",
    "max_pv_capacity",
    "pv_power",
    "scale_penetration",
    "DEFAULT_WINDOW_HOURS",
    "select_worst_window",
]
