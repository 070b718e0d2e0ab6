from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Dict, Literal, Optional, Tuple

import numpy as np

if TYPE_CHECKING:
    from grid_planning.network.topology import Topology

BusKind = Literal["slack", "load"]


class GridValidationError(ValueError):
    """Raised when a grid file or grid object violates the radial grid rules."""


# ---------------- Elements ----------------


@dataclass(frozen=True)
class Bus:
    id: int
    name: str
    kind: BusKind = "load"
    v_nominal: float = 400.0  # line-to-line volts

    def __post_init__(self) -> None:
        if self.kind not in ("slack", "load"):
            raise GridValidationError(f"bus {self.id}: unknown kind {self.kind!r}")
        if self.v_nominal <= 0:
            raise GridValidationError(
                f"bus {self.id}: v_nominal must be > 0 (got {self.v_nominal})"
            )


@dataclass(frozen=True)
class LineType:
    name: str  # e.g. "NAYY 4x50 SE"
    r_per_km: float  # ohm/km
    x_per_km: float  # ohm/km
    ampacity: float  # A
    acquisition_cost: float = 0.0  # euro/km
    installation_cost: float = 60_000.0  # euro/km

    def __post_init__(self) -> None:
        if self.r_per_km <= 0:
            raise GridValidationError(f"line type {self.name!r}: r_per_km must be > 0")
        if self.x_per_km < 0:
            raise GridValidationError(f"line type {self.name!r}: x_per_km must be >= 0")
        if self.ampacity <= 0:
            raise GridValidationError(f"line type {self.name!r}: ampacity must be > 0")


@dataclass(frozen=True)
class LineSegment:
    from_bus: int
    to_bus: int
    length_km: float
    line_type: str
    n_parallel: int = 1

    def __post_init__(self) -> None:
        if self.length_km <= 0:
            raise GridValidationError(
                f"segment {self.from_bus}-{self.to_bus}: length must be > 0"
            )
        if self.n_parallel < 1:
            raise GridValidationError(
                f"segment {self.from_bus}-{self.to_bus}: n_parallel must be >= 1"
            )

    def resistance_ohm(self, lt: LineType) -> float:
        return lt.r_per_km * self.length_km / self.n_parallel

    def reactance_ohm(self, lt: LineType) -> float:
        return lt.x_per_km * self.length_km / self.n_parallel

    def ampacity(self, lt: LineType) -> float:
        return lt.ampacity * self.n_parallel


@dataclass(frozen=True)
class Transformer:
    rating_kva: float
    lv_bus: int
    impedance_ohm: float = 0.0  # magnitude, referred to the LV side
    x_r_ratio: float = 2.0
    replacement_cost: Optional[float] = None  # euro; None prices from the cost book

    def __post_init__(self) -> None:
        if self.rating_kva <= 0:
            raise GridValidationError(
                f"transformer rating must be > 0 (got {self.rating_kva})"
            )
        if self.impedance_ohm < 0:
            raise GridValidationError("transformer impedance must be >= 0")
        if self.replacement_cost is not None and self.replacement_cost < 0:
            raise GridValidationError("transformer replacement cost must be >= 0")

    @property
    def resistance_ohm(self) -> float:
        return self.impedance_ohm / math.sqrt(1.0 + self.x_r_ratio**2)

    @property
    def reactance_ohm(self) -> float:
        return self.resistance_ohm * self.x_r_ratio


# ---------------- Network ----------------


@dataclass(frozen=True)
class GridNetwork:
    """
    Immutable radial low-voltage grid.

    Per-unit system: S_base = transformer rating, V_base = slack nominal voltage.
    Use ``validate_grid`` (or ``load_grid``) to check the radial invariants;
    topology-derived structures are cached on first use.
    """

    buses: Tuple[Bus, ...]
    segments: Tuple[LineSegment, ...]
    transformer: Transformer
    catalog: Tuple[LineType, ...]
    _types: Dict[str, LineType] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "catalog", tuple(self.catalog))
        object.__setattr__(self, "_types", {lt.name: lt for lt in self.catalog})

    # --- lookups ---

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def slack(self) -> Bus:
        return next(b for b in self.buses if b.kind == "slack")

    def line_type(self, name: str) -> LineType:
        try:
            return self._types[name]
        except KeyError:
            raise GridValidationError(f"unknown line type: {name!r}") from None

    def find_segment(self, from_bus: int, to_bus: int) -> int:
        for k, seg in enumerate(self.segments):
            if {seg.from_bus, seg.to_bus} == {from_bus, to_bus}:
                return k
        raise KeyError(f"no segment between bus {from_bus} and bus {to_bus}")

    # --- per-unit bases ---

    @property
    def s_base_kva(self) -> float:
        return self.transformer.rating_kva

    @property
    def v_base(self) -> float:
        return self.slack.v_nominal

    @property
    def z_base(self) -> float:
        return self.v_base**2 / (self.s_base_kva * 1000.0)

    @property
    def i_base(self) -> float:
        return self.s_base_kva * 1000.0 / (math.sqrt(3.0) * self.v_base)

    def segment_impedance_pu(self, k: int) -> complex:
        seg = self.segments[k]
        lt = self.line_type(seg.line_type)
        return complex(seg.resistance_ohm(lt), seg.reactance_ohm(lt)) / self.z_base

    def segment_ampacity(self, k: int) -> float:
        seg = self.segments[k]
        return seg.ampacity(self.line_type(seg.line_type))

    def kw_to_pu(self, kw: np.ndarray) -> np.ndarray:
        return np.asarray(kw, dtype=float) / self.s_base_kva

    # --- derived topology ---

    @cached_property
    def topology(self) -> "Topology":
        from grid_planning.network.topology import Topology

        return Topology.build(self)

    # --- functional updates ---

    def with_segment(self, k: int, segment: LineSegment) -> "GridNetwork":
        segs = list(self.segments)
        segs[k] = segment
        return GridNetwork(self.buses, tuple(segs), self.transformer, self.catalog)

    def with_transformer(self, transformer: Transformer) -> "GridNetwork":
        return dataclasses.replace(self, transformer=transformer)


# ---------------- Time series ----------------


@dataclass(frozen=True)
class InjectionSeries:
    """
    Hourly per-bus active power, kW. Arrays are (hours, buses) indexed by bus id.
    """

    timestamps: np.ndarray  # datetime64[s], strictly increasing, 1 h spacing
    load: np.ndarray
    generation: np.ndarray

    def __post_init__(self) -> None:
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        load = np.array(self.load, dtype=float, ndmin=2)
        gen = np.array(self.generation, dtype=float, ndmin=2)
        if load.shape != gen.shape:
            raise ValueError(f"load {load.shape} and generation {gen.shape} differ")
        if load.shape[0] != ts.shape[0]:
            raise ValueError(
                f"{ts.shape[0]} timestamps but {load.shape[0]} injection rows"
            )
        if (load < 0).any() or (gen < 0).any():
            raise ValueError("load and generation must be >= 0 kW")
        if ts.size > 1:
            steps = np.diff(ts).astype("timedelta64[s]").astype(np.int64)
            if (steps != 3600).any():
                bad = int(np.argmax(steps != 3600))
                raise ValueError(
                    f"timestamps must be hourly and increasing (row {bad + 1}: {ts[bad + 1]})"
                )
        load.setflags(write=False)
        gen.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "load", load)
        object.__setattr__(self, "generation", gen)

    @property
    def hours(self) -> int:
        return int(self.load.shape[0])

    @property
    def n_buses(self) -> int:
        return int(self.load.shape[1])

    def net_kw(self) -> np.ndarray:
        """Net injection, generation minus load, kW (hours x buses)."""
        return self.generation - self.load

    def window(self, start: int, hours: int) -> "InjectionSeries":
        stop = start + hours
        if start < 0 or stop > self.hours:
            raise ValueError(f"window [{start}, {stop}) outside 0..{self.hours}")
        return InjectionSeries(
            self.timestamps[start:stop],
            self.load[start:stop],
            self.generation[start:stop],
        )

    def scaled_generation(self, fraction: float) -> "InjectionSeries":
        return InjectionSeries(self.timestamps, self.load, self.generation * fraction)

    def with_generation(self, generation: np.ndarray) -> "InjectionSeries":
        return InjectionSeries(self.timestamps, self.load, generation)

    def with_adjustments(
        self,
        extra_load: Optional[np.ndarray] = None,
        extra_generation: Optional[np.ndarray] = None,
        curtailed: Optional[np.ndarray] = None,
    ) -> "InjectionSeries":
        """Battery charging as extra load, discharging as extra generation."""
        load = self.load.copy()
        gen = self.generation.copy()
        if extra_load is not None:
            load += extra_load
        if extra_generation is not None:
            gen += extra_generation
        if curtailed is not None:
            gen -= curtailed
        # solver round-off can leave tiny negatives
        return InjectionSeries(
            self.timestamps, np.clip(load, 0.0, None), np.clip(gen, 0.0, None)
        )

    def pu(self, grid: GridNetwork, power_factor: Optional[float] = None) -> np.ndarray:
        """
        Complex per-unit net injections (hours x buses). Loads draw reactive power
        at ``power_factor`` when given; PV runs at unity power factor.
        """
        p = grid.kw_to_pu(self.net_kw())
        if power_factor is None or power_factor >= 1.0:
            return p.astype(complex)
        tan_phi = math.tan(math.acos(power_factor))
        q = -grid.kw_to_pu(self.load) * tan_phi
        return p + 1j * q
