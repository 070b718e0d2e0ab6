from __future__ import annotations

import numpy as np
import pytest

from grid_planning.pv import (
    IrradianceRecord,
    PvSystemParams,
    RoofSpec,
    bus_capacities,
    clear_sky,
    generation_profile,
    max_pv_capacity,
    poa_irradiance,
    pv_power,
    scale_penetration,
    select_worst_window,
    sun_position,
)

from tests.grids import hourly

STUTTGART = (48.8, 9.18)


# ---------------- Capacity ----------------


def test_max_pv_capacity() -> None:
    assert max_pv_capacity(RoofSpec(1, 100.0, 180.0, 30.0)) == pytest.approx(16.0)


def test_roof_and_params_bounds() -> None:
    with pytest.raises(ValueError):
        PvSystemParams(usable_fraction=0.0)
    with pytest.raises(ValueError):
        RoofSpec(1, 0.0, 180.0, 30.0)
    with pytest.raises(ValueError):
        RoofSpec(1, 50.0, 360.0, 30.0)
    with pytest.raises(ValueError):
        PvSystemParams.from_dict({"usable_fraction": 0.7, "efficiency": 0.2})


def test_bus_capacities_add_up() -> None:
    roofs = [RoofSpec(2, 50.0, 180.0, 30.0), RoofSpec(2, 25.0, 90.0, 30.0), RoofSpec(3, 100.0, 180.0, 0.0)]
    np.testing.assert_allclose(bus_capacities(roofs, 4), [0.0, 0.0, 12.0, 16.0])
    with pytest.raises(ValueError):
        bus_capacities([RoofSpec(9, 10.0, 180.0, 30.0)], 4)


def test_scale_penetration() -> None:
    caps = np.array([10.0, 16.0, 4.0])
    np.testing.assert_array_equal(scale_penetration(caps, 1.0), caps)
    np.testing.assert_allclose(scale_penetration(caps, 0.5), caps / 2)
    assert scale_penetration(caps, 0.8).sum() == pytest.approx(1.6 * scale_penetration(caps, 0.5).sum())
    with pytest.raises(ValueError):
        scale_penetration(caps, 1.2)


# ---------------- Geometry ----------------


def test_equator_equinox_noon() -> None:
    zenith, _ = sun_position(np.datetime64("2019-03-21T12:08:00"), 0.0, 0.0)
    assert float(zenith) < 1.0


def test_midnight_is_below_horizon() -> None:
    zenith, _ = sun_position(np.datetime64("2019-06-21T23:00:00"), *STUTTGART)
    assert float(zenith) > 90.0


def test_stuttgart_solstice_noon() -> None:
    zenith, azimuth = sun_position(np.datetime64("2019-06-21T11:25:00"), *STUTTGART)
    assert float(zenith) == pytest.approx(48.8 - 23.44, abs=1.0)
    assert float(azimuth) == pytest.approx(180.0, abs=5.0)


def test_invalid_coordinates() -> None:
    with pytest.raises(ValueError):
        sun_position(np.datetime64("2019-06-21T12:00:00"), 95.0, 0.0)


# ---------------- Plane of array ----------------


def _clear_record(ts: np.ndarray, lat: float, lon: float) -> IrradianceRecord:
    zenith, _ = sun_position(ts, lat, lon)
    ghi, dni, dhi = clear_sky(zenith)
    return IrradianceRecord(ts, ghi, dni, dhi, np.full(ts.shape, 20.0), lat, lon)


def test_horizontal_plane_reproduces_ghi() -> None:
    ts = hourly(48)
    rec = _clear_record(ts, *STUTTGART)
    sun = sun_position(ts, *STUTTGART)
    poa = poa_irradiance(rec, sun, tilt=0.0, surface_azimuth=180.0)
    np.testing.assert_allclose(poa, rec.ghi, atol=1e-9)


def test_beam_is_zero_below_horizon() -> None:
    rec = IrradianceRecord(np.datetime64("2019-06-21T23:00:00"), 0.0, 500.0, 0.0, 10.0, *STUTTGART)
    sun = sun_position(rec.timestamp, *STUTTGART)
    assert float(poa_irradiance(rec, sun, 30.0, 180.0)) == 0.0


def test_tilted_south_roof_three_terms() -> None:
    ts = np.datetime64("2019-06-21T11:25:00")
    rec = IrradianceRecord(ts, 900.0, 800.0, 150.0, 25.0, *STUTTGART)
    zenith, azimuth = sun_position(ts, *STUTTGART)
    z, tilt = np.radians(float(zenith)), np.radians(30.0)
    cos_inc = np.cos(z) * np.cos(tilt) + np.sin(z) * np.sin(tilt) * np.cos(np.radians(float(azimuth) - 180.0))
    expected = (
        800.0 * max(0.0, cos_inc)
        + 150.0 * (1 + np.cos(tilt)) / 2
        + 900.0 * 0.2 * (1 - np.cos(tilt)) / 2
    )
    got = float(poa_irradiance(rec, (zenith, azimuth), 30.0, 180.0, albedo=0.2))
    assert got == pytest.approx(expected, rel=1e-9)


# ---------------- Power ----------------


def test_pv_power_chain() -> None:
    assert float(pv_power(0.0, 20.0, 10.0)) == 0.0
    assert float(pv_power(1000.0, 20.0, 10.0)) == pytest.approx(8.592)
    # dc 11.4 kW would exceed the rating: clipped at capacity x inverter efficiency
    assert float(pv_power(1200.0, 0.0, 10.0)) == pytest.approx(9.6)


def test_pv_power_monotone_below_clipping() -> None:
    poa = np.linspace(0.0, 1000.0, 101)
    ac = pv_power(poa, 20.0, 10.0)
    assert (np.diff(ac) >= 0).all()
    with pytest.raises(ValueError):
        pv_power(500.0, 20.0, -1.0)


def test_generation_profile_scales_with_penetration() -> None:
    ts = hourly(24)
    rec = _clear_record(ts, *STUTTGART)
    roofs = [RoofSpec(1, 60.0, 180.0, 30.0), RoofSpec(2, 40.0, 200.0, 35.0)]
    full = generation_profile(rec, roofs, 3, fraction=1.0)
    half = generation_profile(rec, roofs, 3, fraction=0.5)
    assert full.shape == (24, 3)
    assert (full[:, 0] == 0).all()
    assert full[:, 1].max() > 0
    np.testing.assert_allclose(half, full / 2, atol=1e-12)


# ---------------- Worst window ----------------


def _brute_force(series: np.ndarray, w: int) -> int:
    sums = [series[s : s + w].sum() for s in range(series.size - w + 1)]
    return int(np.argmax(sums))


def test_constant_series_picks_first_window() -> None:
    assert select_worst_window(np.full(200, 3.0), 72) == 0


def test_single_spike_window() -> None:
    series = np.zeros(240)
    series[100] = 50.0
    assert select_worst_window(series, 72) == 29


def test_window_equals_brute_force() -> None:
    rng = np.random.default_rng(5)
    for n, w in [(100, 7), (500, 72), (2000, 72), (97, 97)]:
        series = np.round(rng.normal(0.0, 10.0, n), 2)
        assert select_worst_window(series, w) == _brute_force(series, w)


def test_window_errors() -> None:
    with pytest.raises(ValueError, match="too short"):
        select_worst_window(np.zeros(10), 72)
    with pytest.raises(ValueError):
        select_worst_window(np.zeros(10), 0)
