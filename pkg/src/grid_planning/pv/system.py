from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any, Dict, Iterable, Sequence

import numpy as np

from grid_planning.pv.solar import IrradianceRecord, poa_irradiance, sun_position


@dataclass(frozen=True)
class RoofSpec:
    bus: int
    area: float  # m2
    azimuth: float  # deg, 0 = north, 180 = south
    tilt: float  # deg from horizontal

    def __post_init__(self) -> None:
        if self.area <= 0:
            raise ValueError(f"roof at bus {self.bus}: area must be > 0 (got {self.area})")
        if not 0.0 <= self.tilt <= 90.0:
            raise ValueError(f"roof at bus {self.bus}: tilt {self.tilt} outside [0, 90]")
        if not 0.0 <= self.azimuth < 360.0:
            raise ValueError(f"roof at bus {self.bus}: azimuth {self.azimuth} outside [0, 360)")


@dataclass(frozen=True)
class PvSystemParams:
    usable_fraction: float = 0.8
    power_density: float = 0.2  # kWp/m2
    temp_coefficient: float = -0.004  # 1/degC
    noct: float = 45.0  # degC
    inverter_efficiency: float = 0.96
    dc_ac_ratio: float = 1.0
    albedo: float = 0.2

    def __post_init__(self) -> None:
        if not 0.0 < self.usable_fraction <= 1.0:
            raise ValueError(f"usable_fraction must be in (0, 1] (got {self.usable_fraction})")
        if not 0.0 < self.inverter_efficiency <= 1.0:
            raise ValueError(
                f"inverter_efficiency must be in (0, 1] (got {self.inverter_efficiency})"
            )
        if self.power_density <= 0 or self.dc_ac_ratio <= 0:
            raise ValueError("power_density and dc_ac_ratio must be > 0")

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "PvSystemParams":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown PV parameter(s): {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in raw.items()})


def max_pv_capacity(roof: RoofSpec, params: PvSystemParams = PvSystemParams()) -> float:
    """Maximum installable PV capacity on a roof, kWp."""
    return roof.area * params.usable_fraction * params.power_density


def pv_power(
    poa: np.ndarray | float,
    ambient_temp: np.ndarray | float,
    capacity: float,
    params: PvSystemParams = PvSystemParams(),
) -> np.ndarray:
    """NOCT cell temperature, linear temperature derating and inverter clipping; AC kW."""
    if capacity < 0:
        raise ValueError(f"capacity must be >= 0 (got {capacity})")
    poa = np.asarray(poa, dtype=float)
    cell = np.asarray(ambient_temp, dtype=float) + (params.noct - 20.0) / 800.0 * poa
    dc = capacity * (poa / 1000.0) * (1.0 + params.temp_coefficient * (cell - 25.0))
    ac_limit = capacity / params.dc_ac_ratio * params.inverter_efficiency
    ac = np.minimum(dc * params.inverter_efficiency, ac_limit)
    return np.maximum(ac, 0.0)


def scale_penetration(capacities: np.ndarray | Sequence[float], fraction: float) -> np.ndarray:
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"PV penetration must be in [0, 1] (got {fraction})")
    return np.asarray(capacities, dtype=float) * fraction


def bus_capacities(
    roofs: Iterable[RoofSpec], n_buses: int, params: PvSystemParams = PvSystemParams()
) -> np.ndarray:
    """P_PV,max per bus id (several roofs on one bus add up)."""
    cap = np.zeros(n_buses)
    for roof in roofs:
        if not 0 <= roof.bus < n_buses:
            raise ValueError(f"roof references unknown bus {roof.bus}")
        cap[roof.bus] += max_pv_capacity(roof, params)
    return cap


def generation_profile(
    irradiance: IrradianceRecord,
    roofs: Sequence[RoofSpec],
    n_buses: int,
    params: PvSystemParams = PvSystemParams(),
    fraction: float = 1.0,
) -> np.ndarray:
    """
    AC generation per hour and bus (hours x buses, kW) for every roof running
    at ``fraction`` of its maximum capacity.
    """
    sun = sun_position(irradiance.timestamp, irradiance.latitude, irradiance.longitude)
    hours = np.asarray(irradiance.ghi).shape[0]
    out = np.zeros((hours, n_buses))
    for roof in roofs:
        cap = float(scale_penetration([max_pv_capacity(roof, params)], fraction)[0])
        poa = poa_irradiance(irradiance, sun, roof.tilt, roof.azimuth, params.albedo)
        out[:, roof.bus] += pv_power(poa, irradiance.ambient_temp, cap, params)
    return out
