# Injection / irradiance CSV + roof JSON -> InjectionSeries
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pyarrow as pa
import pyarrow.csv as pacsv

from grid_planning.network import GridNetwork, GridValidationError, InjectionSeries
from grid_planning.pv import IrradianceRecord, PvSystemParams, RoofSpec, generation_profile

log = logging.getLogger(__name__)


# ---------------- Column names ----------------

TIMESTAMP = "timestamp"
IRRADIANCE_COLUMNS = ("ghi_wm2", "dni_wm2", "dhi_wm2", "temp_c")

_BUS_COL_RE = re.compile(r"^bus_(?P<bus>\d+)_(?P<kind>load|gen)_kw$")


def load_column(bus: int) -> str:
    return f"bus_{bus}_load_kw"


def gen_column(bus: int) -> str:
    return f"bus_{bus}_gen_kw"


def _parse_bus_column(name: str) -> Tuple[int, str]:
    """
    Extract (bus id, 'load' | 'gen') from an injection column name.
    Example: bus_12_gen_kw -> (12, 'gen')
    """
    m = _BUS_COL_RE.match(name)
    if not m:
        raise ValueError(f"Cannot parse injection column: {name!r}")
    return int(m.group("bus")), m.group("kind")


# ---------------- CSV helpers ----------------


def _read_table(path: Path, float_columns: Sequence[str] = ()) -> pa.Table:
    if not path.is_file():
        raise FileNotFoundError(f"Source not found: {path}")
    convert = pacsv.ConvertOptions(
        column_types={TIMESTAMP: pa.timestamp("s"), **{c: pa.float64() for c in float_columns}},
    )
    try:
        tbl = pacsv.read_csv(path, convert_options=convert)
    except pa.ArrowInvalid as exc:
        raise ValueError(f"{path}: {exc}") from None
    if TIMESTAMP not in tbl.column_names:
        raise ValueError(f"{path}: missing {TIMESTAMP!r} column")
    return tbl


def _timestamps(tbl: pa.Table) -> np.ndarray:
    col = tbl.column(TIMESTAMP)
    if col.null_count:
        raise ValueError("timestamp column has empty cells")
    return np.asarray(col.to_numpy(), dtype="datetime64[s]")


def _floats(tbl: pa.Table, name: str) -> np.ndarray:
    col = tbl.column(name)
    if col.null_count:
        raise ValueError(f"column {name!r} has empty cells")
    return np.asarray(col.to_numpy(), dtype=float)


# ---------------- Injections ----------------


def load_injections(path: str | Path, grid: GridNetwork) -> InjectionSeries:
    """
    Read an injection CSV (``timestamp,bus_<id>_load_kw,bus_<id>_gen_kw,...``).

    Buses without a column inject nothing. Unknown buses, injections at the
    slack and unparsable column names are rejected; hourly spacing and
    non-negativity are checked by ``InjectionSeries``.
    """
    p = Path(path)
    tbl = _read_table(p)
    ts = _timestamps(tbl)
    load = np.zeros((ts.shape[0], grid.n_buses))
    gen = np.zeros_like(load)
    known = {b.id for b in grid.buses}
    slack = grid.slack.id

    bus_cols = [c for c in tbl.column_names if c != TIMESTAMP]
    if not bus_cols:
        raise ValueError(f"{p}: no bus columns")
    for name in bus_cols:
        bus, kind = _parse_bus_column(name)
        if bus not in known:
            raise GridValidationError(f"{p}: column {name!r} references unknown bus {bus}")
        if bus == slack:
            raise GridValidationError(f"{p}: column {name!r} injects at the slack bus")
        target = load if kind == "load" else gen
        target[:, bus] = _floats(tbl, name)

    try:
        series = InjectionSeries(ts, load, gen)
    except ValueError as exc:
        raise ValueError(f"{p}: {exc}") from None
    log.info("[ingest] injections=%s hours=%d columns=%d", p.name, series.hours, len(bus_cols))
    return series


def write_injections(series: InjectionSeries, path: str | Path, grid: GridNetwork) -> None:
    """Write every non-slack bus as one load and one generation column."""
    from grid_planning.storage import TableWriter

    buses = [b.id for b in grid.buses if b.kind != "slack"]
    columns: Dict[str, Any] = {TIMESTAMP: series.timestamps}
    for b in buses:
        columns[load_column(b)] = series.load[:, b]
        columns[gen_column(b)] = series.generation[:, b]
    TableWriter(decimals=4).write_csv(columns, path)


# ---------------- Irradiance ----------------


def read_irradiance(
    path: str | Path, latitude: float = 48.78, longitude: float = 9.18
) -> IrradianceRecord:
    """Read ``timestamp,ghi_wm2,dni_wm2,dhi_wm2,temp_c`` (UTC, hourly)."""
    p = Path(path)
    tbl = _read_table(p, IRRADIANCE_COLUMNS)
    missing = [c for c in IRRADIANCE_COLUMNS if c not in tbl.column_names]
    if missing:
        raise ValueError(f"{p}: missing column(s) {missing}")
    ghi, dni, dhi, temp = (_floats(tbl, c) for c in IRRADIANCE_COLUMNS)
    rec = IrradianceRecord(_timestamps(tbl), ghi, dni, dhi, temp, latitude, longitude)
    log.info("[ingest] irradiance=%s hours=%d", p.name, ghi.shape[0])
    return rec


def write_irradiance(record: IrradianceRecord, path: str | Path) -> None:
    from grid_planning.storage import TableWriter

    TableWriter(decimals=3).write_csv(
        {
            TIMESTAMP: np.asarray(record.timestamp, dtype="datetime64[s]"),
            "ghi_wm2": record.ghi,
            "dni_wm2": record.dni,
            "dhi_wm2": record.dhi,
            "temp_c": record.ambient_temp,
        },
        path,
    )


# ---------------- Roofs ----------------


def read_roofs(path: str | Path) -> Tuple[RoofSpec, ...]:
    """Roof JSON: an array of ``{bus, area, azimuth, tilt}`` objects."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"Roof file not found: {p}")
    raw = json.loads(p.read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ValueError(f"{p}: expected a JSON array of roofs")
    roofs: List[RoofSpec] = []
    for i, entry in enumerate(raw):
        try:
            roofs.append(
                RoofSpec(
                    bus=int(entry["bus"]),
                    area=float(entry["area"]),
                    azimuth=float(entry["azimuth"]),
                    tilt=float(entry["tilt"]),
                )
            )
        except KeyError as exc:
            raise ValueError(f"{p}: roof #{i} lacks field {exc.args[0]!r}") from None
    return tuple(roofs)


def write_roofs(roofs: Sequence[RoofSpec], path: str | Path) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    doc = [
        {"bus": r.bus, "area": round(r.area, 4), "azimuth": r.azimuth, "tilt": r.tilt}
        for r in sorted(roofs, key=lambda r: r.bus)
    ]
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


# ---------------- Config ----------------


@dataclass(frozen=True)
class IngestConfig:
    grid: GridNetwork
    injections: Optional[Path] = None  # CSV with load and full-potential generation
    irradiance: Optional[Path] = None  # or raw irradiance ...
    roofs: Optional[Path] = None  # ... plus roof JSON ...
    load_profile: Optional[Path] = None  # ... plus load CSV (injection format)
    pv_params: PvSystemParams = PvSystemParams()
    latitude: float = 48.78
    longitude: float = 9.18

    def __post_init__(self) -> None:
        raw = self.irradiance is not None or self.roofs is not None
        if self.injections is None and not raw:
            raise ValueError("need an injection CSV or irradiance + roof files")
        if self.injections is not None and raw:
            raise ValueError("give either an injection CSV or irradiance + roofs, not both")
        if raw and (self.irradiance is None or self.roofs is None):
            raise ValueError("irradiance and roofs must be given together")


# ---------------- Ingestor ----------------


class ProfileIngestor:
    """
    Assemble hourly injections at full rooftop potential (penetration 1).
    Either read them from an injection CSV, or run the PV chain on raw
    irradiance and roofs and pair it with a load profile.
    """

    def ingest(self, cfg: IngestConfig) -> InjectionSeries:
        if cfg.injections is not None:
            return load_injections(cfg.injections, cfg.grid)

        assert cfg.irradiance is not None and cfg.roofs is not None
        irr = read_irradiance(cfg.irradiance, cfg.latitude, cfg.longitude)
        roofs = read_roofs(cfg.roofs)
        gen = generation_profile(irr, roofs, cfg.grid.n_buses, cfg.pv_params, 1.0)
        ts = np.asarray(irr.timestamp, dtype="datetime64[s]")

        if cfg.load_profile is None:
            log.info("[ingest] no load profile, generation only")
            load = np.zeros_like(gen)
        else:
            load_series = load_injections(cfg.load_profile, cfg.grid)
            if not np.array_equal(load_series.timestamps, ts):
                raise ValueError(
                    f"load profile {cfg.load_profile} and irradiance {cfg.irradiance} "
                    "cover different timestamps"
                )
            load = np.asarray(load_series.load)
        log.info("[ingest] pv-chain roofs=%d hours=%d", len(roofs), ts.shape[0])
        return InjectionSeries(ts, load, gen)
