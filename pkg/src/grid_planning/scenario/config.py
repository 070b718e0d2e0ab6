from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple

from grid_planning.battery import DEFAULT_CANDIDATES, BatteryCount
from grid_planning.pv import DEFAULT_WINDOW_HOURS, PvSystemParams

Linearization = Literal["flat", "peak"]
Backend = Literal["simplex", "highs"]

_PATH_FIELDS = ("grid", "injections", "irradiance", "roofs", "load_profile", "costs")


# ---------------- Scenario ----------------


@dataclass(frozen=True)
class ScenarioConfig:
    grid: Path
    injections: Optional[Path] = None  # load and generation at full rooftop potential
    irradiance: Optional[Path] = None
    roofs: Optional[Path] = None
    load_profile: Optional[Path] = None
    pv_penetration: float = 0.5
    v_deviation_limit: float = 0.03
    batteries: BatteryCount = BatteryCount()
    allow_curtailment: bool = False
    costs: Optional[Path] = None
    window_hours: int = DEFAULT_WINDOW_HOURS
    latitude: float = 48.78
    longitude: float = 9.18
    candidate_k: int = DEFAULT_CANDIDATES
    slack_v: float = 1.0
    linearization: Linearization = "flat"
    power_factor: Optional[float] = None  # of the loads; None = active power only
    solver: Backend = "simplex"
    workers: int = 1
    pv: PvSystemParams = field(default_factory=PvSystemParams)

    def __post_init__(self) -> None:
        for name in _PATH_FIELDS:
            value = getattr(self, name)
            if value is not None and not isinstance(value, Path):
                object.__setattr__(self, name, Path(value))
        if not 0.0 <= self.pv_penetration <= 1.0:
            raise ValueError(f"pv_penetration must be in [0, 1] (got {self.pv_penetration})")
        if self.v_deviation_limit <= 0:
            raise ValueError(f"v_deviation_limit must be > 0 (got {self.v_deviation_limit})")
        if self.window_hours < 1:
            raise ValueError(f"window_hours must be >= 1 (got {self.window_hours})")
        if self.candidate_k < 1:
            raise ValueError(f"candidate_k must be >= 1 (got {self.candidate_k})")
        if self.linearization not in ("flat", "peak"):
            raise ValueError(f"linearization must be flat or peak (got {self.linearization!r})")
        if self.solver not in ("simplex", "highs"):
            raise ValueError(f"solver must be simplex or highs (got {self.solver!r})")
        if self.power_factor is not None and not 0.0 < self.power_factor <= 1.0:
            raise ValueError(f"power_factor must be in (0, 1] (got {self.power_factor})")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1 (got {self.workers})")
        if self.injections is None and (self.irradiance is None or self.roofs is None):
            raise ValueError("scenario needs injections, or irradiance and roofs")

    @classmethod
    def from_dict(cls, raw: Dict[str, Any], base_dir: Optional[Path] = None) -> "ScenarioConfig":
        """
        Build from a JSON object; relative paths resolve against ``base_dir``
        (the scenario file's directory).
        """
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown scenario field(s): {sorted(unknown)}")
        kwargs: Dict[str, Any] = dict(raw)
        for name in _PATH_FIELDS:
            if kwargs.get(name) is not None:
                p = Path(kwargs[name])
                kwargs[name] = p if p.is_absolute() or base_dir is None else base_dir / p
        if "batteries" in kwargs:
            kwargs["batteries"] = BatteryCount.parse(str(kwargs["batteries"]))
        if "pv" in kwargs:
            kwargs["pv"] = PvSystemParams.from_dict(kwargs["pv"])
        if "grid" not in kwargs:
            raise ValueError("scenario lacks the 'grid' path")
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str | Path) -> "ScenarioConfig":
        return read_scenario(path)[0]

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Path):
                value = str(value)
            elif isinstance(value, BatteryCount):
                value = value.label
            elif isinstance(value, PvSystemParams):
                value = dataclasses.asdict(value)
            out[f.name] = value
        return out

    def with_overrides(self, **changes: Any) -> "ScenarioConfig":
        """Replace the fields given with a non-None value (CLI flags over file values)."""
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


# ---------------- Comparison matrix ----------------


@dataclass(frozen=True)
class CompareConfig:
    penetrations: Tuple[float, ...] = (0.5, 0.8)
    limits: Tuple[float, ...] = (0.03, 0.05)
    variants: Tuple[str, ...] = ("auto", "=5", "=10")

    def __post_init__(self) -> None:
        object.__setattr__(self, "penetrations", tuple(float(p) for p in self.penetrations))
        object.__setattr__(self, "limits", tuple(float(v) for v in self.limits))
        object.__setattr__(self, "variants", tuple(str(v) for v in self.variants))
        if not self.penetrations or not self.limits:
            raise ValueError("comparison needs at least one penetration and one limit")
        for label in self.variants:
            BatteryCount.parse(label)
        if len(set(self.variants)) != len(self.variants):
            raise ValueError(f"duplicate battery variant in {list(self.variants)}")

    @property
    def cells(self) -> Tuple[Tuple[float, float], ...]:
        return tuple((p, v) for p in self.penetrations for v in self.limits)

    @property
    def counts(self) -> Tuple[BatteryCount, ...]:
        return tuple(BatteryCount.parse(label) for label in self.variants)

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "CompareConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown compare field(s): {sorted(unknown)}")
        return cls(**{k: tuple(v) for k, v in raw.items()})


def read_scenario(path: str | Path) -> Tuple[ScenarioConfig, CompareConfig]:
    """Scenario JSON with an optional ``compare`` object for the comparison matrix."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"Scenario not found: {p}")
    raw = json.loads(p.read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ValueError(f"{p}: expected a JSON object")
    matrix = CompareConfig.from_dict(raw.pop("compare", {}))
    return ScenarioConfig.from_dict(raw, base_dir=p.parent), matrix
