"""Solar geometry and plane-of-array irradiance (isotropic sky)."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Tuple, Union

import numpy as np

TimeLike = Union[datetime, np.datetime64, np.ndarray, str]


@dataclass(frozen=True)
class IrradianceRecord:
    """
    Measured irradiance at the site. Fields may be scalars or equally shaped
    arrays (one entry per timestamp).
    """

    timestamp: np.ndarray
    ghi: np.ndarray  # W/m2
    dni: np.ndarray
    dhi: np.ndarray
    ambient_temp: np.ndarray  # degC
    latitude: float = 48.78
    longitude: float = 9.18

    def __post_init__(self) -> None:
        for name in ("ghi", "dni", "dhi"):
            if (np.asarray(getattr(self, name)) < 0).any():
                raise ValueError(f"{name} must be >= 0 W/m2")


def _as_datetime64(ts: TimeLike) -> np.ndarray:
    if isinstance(ts, datetime) and ts.tzinfo is not None:
        ts = ts.replace(tzinfo=None) - ts.utcoffset()  # type: ignore[operator]
    return np.asarray(ts, dtype="datetime64[s]")


def day_of_year(ts: TimeLike) -> np.ndarray:
    t = _as_datetime64(ts)
    return (t.astype("datetime64[D]") - t.astype("datetime64[Y]")).astype(int) + 1


def declination(doy: np.ndarray) -> np.ndarray:
    """Solar declination in degrees (Cooper)."""
    return 23.44 * np.sin(np.radians(360.0 / 365.0 * (284.0 + np.asarray(doy))))


def equation_of_time(doy: np.ndarray) -> np.ndarray:
    """Equation of time in minutes (Spencer)."""
    b = np.radians(360.0 / 365.0 * (np.asarray(doy) - 81.0))
    return 9.87 * np.sin(2 * b) - 7.53 * np.cos(b) - 1.5 * np.sin(b)


def sun_position(
    timestamp: TimeLike, latitude: float, longitude: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Zenith and azimuth in degrees for UTC timestamps. Azimuth is measured
    clockwise from north (180 = south).
    """
    if not -90.0 <= latitude <= 90.0 or not -180.0 <= longitude <= 180.0:
        raise ValueError(f"invalid coordinates ({latitude}, {longitude})")
    t = _as_datetime64(timestamp)
    doy = day_of_year(t)
    utc_hours = (t - t.astype("datetime64[D]")).astype("timedelta64[s]").astype(float) / 3600.0
    solar_time = utc_hours + longitude / 15.0 + equation_of_time(doy) / 60.0
    omega = np.radians(15.0 * (solar_time - 12.0))
    delta = np.radians(declination(doy))
    phi = np.radians(latitude)

    cos_z = np.sin(phi) * np.sin(delta) + np.cos(phi) * np.cos(delta) * np.cos(omega)
    zenith = np.degrees(np.arccos(np.clip(cos_z, -1.0, 1.0)))
    azimuth = (
        np.degrees(
            np.arctan2(
                np.sin(omega),
                np.cos(omega) * np.sin(phi) - np.tan(delta) * np.cos(phi),
            )
        )
        + 180.0
    ) % 360.0
    return zenith, azimuth


def cos_incidence(
    zenith: np.ndarray, sun_azimuth: np.ndarray, tilt: float, surface_azimuth: float
) -> np.ndarray:
    z = np.radians(zenith)
    beta = np.radians(tilt)
    return np.cos(z) * np.cos(beta) + np.sin(z) * np.sin(beta) * np.cos(
        np.radians(np.asarray(sun_azimuth) - surface_azimuth)
    )


def poa_irradiance(
    record: IrradianceRecord,
    sun: Tuple[np.ndarray, np.ndarray],
    tilt: float,
    surface_azimuth: float,
    albedo: float = 0.2,
) -> np.ndarray:
    """Beam + isotropic sky diffuse + ground-reflected irradiance on the plane, W/m2."""
    zenith, azimuth = sun
    cos_t = cos_incidence(zenith, azimuth, tilt, surface_azimuth)
    above = np.asarray(zenith) < 90.0
    beam = np.where(above, np.asarray(record.dni) * np.maximum(0.0, cos_t), 0.0)
    cb = np.cos(np.radians(tilt))
    diffuse = np.asarray(record.dhi) * (1.0 + cb) / 2.0
    ground = np.asarray(record.ghi) * albedo * (1.0 - cb) / 2.0
    return beam + diffuse + ground


def clear_sky(zenith: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Simple clear-sky irradiance (GHI, DNI, DHI) used for synthetic fixtures.
    The three components satisfy ghi = dni * cos(zenith) + dhi.
    """
    cos_z = np.clip(np.cos(np.radians(zenith)), 0.0, None)
    air_mass = np.where(cos_z > 0.01, 1.0 / np.maximum(cos_z, 0.01), 0.0)
    dni = np.where(cos_z > 0.01, 1367.0 * 0.7 ** (air_mass**0.678), 0.0)
    dhi = 0.1 * dni * cos_z + np.where(cos_z > 0.01, 20.0 * cos_z, 0.0)
    ghi = dni * cos_z + dhi
    return ghi, dni, dhi
