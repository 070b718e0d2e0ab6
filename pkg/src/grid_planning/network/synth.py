"""
Synthetic low-voltage feeders with household load and rooftop PV.

Used for fixtures and demos: the topology, roofs, weather and load are all
drawn from one seeded generator, so equal seeds give equal cases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from grid_planning.network.loader import NAYY_CATALOG
from grid_planning.network.model import (
    Bus,
    GridNetwork,
    InjectionSeries,
    LineSegment,
    Transformer,
)
from grid_planning.powerflow.sweep import loadflow_series
from grid_planning.pv import (
    DEFAULT_WINDOW_HOURS,
    IrradianceRecord,
    PvSystemParams,
    RoofSpec,
    clear_sky,
    generation_profile,
    select_worst_window,
    sun_position,
)

log = logging.getLogger(__name__)

TRANSFORMER_KVA = 630.0
TRANSFORMER_OHM = 0.0102  # 4 % short-circuit voltage at 630 kVA / 0.4 kV
DEFAULT_START = "2019-06-01T00:00:00"
CALIBRATION_PENETRATION = 0.5
CALIBRATION_RISE = 0.04


@dataclass(frozen=True)
class SyntheticCase:
    grid: GridNetwork
    roofs: Tuple[RoofSpec, ...]
    irradiance: IrradianceRecord
    injections: InjectionSeries  # generation at full rooftop potential


def _feeder_sizes(n_load: int, n_feeders: int) -> List[int]:
    # the last feeder is short so that it stays within limits
    weights = np.ones(n_feeders)
    if n_feeders > 1:
        weights[-1] = 0.35
    sizes = np.floor(weights / weights.sum() * n_load).astype(int)
    sizes[0] += n_load - sizes.sum()
    return [int(s) for s in sizes]


def synthesize_feeder(n_buses: int = 106, n_feeders: int = 4, seed: int = 0) -> GridNetwork:
    """
    Radial grid: slack (bus 0), transformer to the LV busbar (bus 1), and
    ``n_feeders`` cable feeders sharing the remaining buses.
    """
    if n_feeders < 1 or n_buses < n_feeders + 2:
        raise ValueError(
            f"need at least {n_feeders + 2} buses for {n_feeders} feeders (got {n_buses})"
        )
    rng = np.random.default_rng(seed)
    small, trunk = NAYY_CATALOG[0].name, NAYY_CATALOG[1].name

    buses = [Bus(0, "MV source", "slack"), Bus(1, "LV busbar")]
    segments: List[LineSegment] = []
    next_id = 2
    for f, size in enumerate(_feeder_sizes(n_buses - 2, n_feeders)):
        members: List[int] = []
        for i in range(size):
            bus = next_id
            next_id += 1
            buses.append(Bus(bus, f"feeder {f + 1} node {i + 1}"))
            if not members:
                parent = 1
            elif rng.random() < 0.7:
                parent = members[-1]
            else:
                parent = members[int(rng.integers(0, len(members)))]
            depth_trunk = len(members) < 3
            length = float(np.round(rng.uniform(0.015, 0.04), 4))
            if f == n_feeders - 1 and n_feeders > 1:
                length = float(np.round(length * 0.5, 4))
            segments.append(LineSegment(parent, bus, length, trunk if depth_trunk else small))
            members.append(bus)

    return GridNetwork(
        tuple(buses),
        tuple(segments),
        Transformer(TRANSFORMER_KVA, lv_bus=1, impedance_ohm=TRANSFORMER_OHM),
        NAYY_CATALOG,
    )


def synthesize_roofs(grid: GridNetwork, seed: int = 0) -> Tuple[RoofSpec, ...]:
    rng = np.random.default_rng(seed + 1)
    lv = grid.transformer.lv_bus
    roofs = []
    for b in grid.buses:
        if b.kind == "slack" or b.id == lv:
            continue
        roofs.append(
            RoofSpec(
                bus=b.id,
                area=float(np.round(rng.uniform(40.0, 120.0), 1)),
                azimuth=float(np.round(rng.uniform(120.0, 240.0), 1)),
                tilt=float(np.round(rng.uniform(20.0, 45.0), 1)),
            )
        )
    return tuple(roofs)


def synthesize_irradiance(
    days: int = 14,
    seed: int = 0,
    start: str = DEFAULT_START,
    latitude: float = 48.78,
    longitude: float = 9.18,
) -> IrradianceRecord:
    """Clear-sky irradiance with a random daily cloud factor, hourly UTC."""
    rng = np.random.default_rng(seed + 2)
    hours = days * 24
    ts = np.datetime64(start, "s") + np.arange(hours).astype("timedelta64[h]")
    zenith, _ = sun_position(ts, latitude, longitude)
    ghi, dni, dhi = clear_sky(zenith)
    cloud = np.repeat(rng.uniform(0.35, 1.0, size=days), 24)
    dni = dni * cloud
    dhi = dhi * (1.0 + 0.8 * (1.0 - cloud))
    ghi = dni * np.clip(np.cos(np.radians(zenith)), 0.0, None) + dhi
    hour_of_day = np.arange(hours) % 24
    temp = 18.0 + 7.0 * np.sin(2 * np.pi * (hour_of_day - 9) / 24.0)
    temp = temp + np.repeat(rng.normal(0.0, 2.0, size=days), 24)
    return IrradianceRecord(ts, ghi, dni, dhi, temp, latitude, longitude)


def synthesize_load(
    timestamps: np.ndarray, grid: GridNetwork, seed: int = 0
) -> np.ndarray:
    """Household load per hour and bus, kW; slack and LV busbar carry none."""
    rng = np.random.default_rng(seed + 3)
    hours = np.asarray(timestamps).shape[0]
    local_hour = (np.arange(hours) + 1) % 24
    shape = (
        0.25
        + 0.45 * np.exp(-0.5 * ((local_hour - 7.5) / 1.2) ** 2)
        + 0.9 * np.exp(-0.5 * ((local_hour - 19.0) / 2.0) ** 2)
    )
    load = np.zeros((hours, grid.n_buses))
    lv = grid.transformer.lv_bus
    for b in grid.buses:
        if b.kind == "slack" or b.id == lv:
            continue
        scale = rng.uniform(0.5, 1.5)
        noise = rng.normal(1.0, 0.1, size=hours)
        load[:, b.id] = np.clip(shape * scale * noise, 0.0, None)
    return np.round(load, 4)


def calibrate_roofs(
    grid: GridNetwork,
    roofs: Sequence[RoofSpec],
    irradiance: IrradianceRecord,
    load: np.ndarray,
    params: PvSystemParams = PvSystemParams(),
    penetration: float = CALIBRATION_PENETRATION,
    target_rise: float = CALIBRATION_RISE,
    window_hours: int = DEFAULT_WINDOW_HOURS,
) -> Tuple[RoofSpec, ...]:
    """
    Scale every roof area by one factor so that the peak voltage at
    ``penetration`` sits ``target_rise`` above nominal within the worst
    window (sweep, bisection).
    """
    unit = generation_profile(irradiance, roofs, grid.n_buses, params, penetration)
    ts = np.asarray(irradiance.timestamp, dtype="datetime64[s]")

    def peak(alpha: float) -> float:
        series = InjectionSeries(ts, load, unit * alpha)
        hours = min(window_hours, series.hours)
        start = select_worst_window(series.net_kw().sum(axis=1), hours)
        sol = loadflow_series(grid, series.window(start, hours).pu(grid))
        return float(sol.v.max())

    target = 1.0 + target_rise
    lo, hi = 0.0, 1.0
    while peak(hi) < target:
        lo, hi = hi, hi * 2.0
        if hi > 64.0:
            raise ValueError("calibration target not reachable with plausible roof areas")
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if peak(mid) < target:
            lo = mid
        else:
            hi = mid
    alpha = lo
    log.info("[synth] calibration factor=%.4f peak=%.5f", alpha, peak(alpha))
    return tuple(replace(r, area=r.area * alpha) for r in roofs)


def synthesize_case(
    n_buses: int = 106,
    n_feeders: int = 4,
    seed: int = 0,
    days: int = 14,
    params: PvSystemParams = PvSystemParams(),
) -> SyntheticCase:
    grid = synthesize_feeder(n_buses, n_feeders, seed)
    irr = synthesize_irradiance(days, seed)
    load = synthesize_load(irr.timestamp, grid, seed)
    roofs = calibrate_roofs(grid, synthesize_roofs(grid, seed), irr, load, params)
    gen = generation_profile(irr, roofs, grid.n_buses, params, 1.0)
    injections = InjectionSeries(irr.timestamp, load, np.round(gen, 4))
    log.info(
        "[synth] buses=%d feeders=%d hours=%d seed=%d",
        grid.n_buses, n_feeders, injections.hours, seed,
    )
    return SyntheticCase(grid, roofs, irr, injections)
