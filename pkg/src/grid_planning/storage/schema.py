from __future__ import annotations

import re
from typing import Any, Dict, List, Sequence


def variant_prefix(label: str) -> str:
    """Column prefix of a battery-count variant: auto -> battery_auto, =5 -> battery_eq5."""
    s = label.strip().lower().replace("max-", "max").replace("<=", "max").replace("=", "eq")
    s = re.sub(r"[^a-z0-9]+", "_", s).strip("_")
    return f"battery_{s}"


class ReportSchema:
    """One row per (penetration, limit) cell; battery columns repeat per variant."""

    BASE_COLUMNS = [
        "penetration",
        "v_limit",
        "status",
        "violations",
        "reinforcement_capex_keur",
        "reinforcement_annual_keur",
        "transformer_replaced",
    ]
    VARIANT_FIELDS = ["count", "capacity_kwh", "capex_keur", "annual_keur"]

    def __init__(self, variants: Sequence[str]) -> None:
        self.variants = list(variants)

    @property
    def COLUMNS(self) -> List[str]:
        cols = list(self.BASE_COLUMNS)
        for label in self.variants:
            prefix = variant_prefix(label)
            cols.extend(f"{prefix}_{f}" for f in self.VARIANT_FIELDS)
        return cols

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "penetration": "float64",
            "v_limit": "float64",
            "status": "string",  # ok / no-violations / failed
            "violations": "int64",  # (hour, bus) pairs in the baseline window
            "reinforcement_capex_keur": "float64",
            "reinforcement_annual_keur": "float64",
            "transformer_replaced": "bool",
        }
        for label in self.variants:
            prefix = variant_prefix(label)
            out[f"{prefix}_count"] = "int64"
            out[f"{prefix}_capacity_kwh"] = "float64"
            out[f"{prefix}_capex_keur"] = "float64"
            out[f"{prefix}_annual_keur"] = "float64"
        return out


class VoltageSchema:
    """Wide voltage profile: timestamp plus one p.u. column per bus."""

    def __init__(self, bus_ids: Sequence[int]) -> None:
        self.bus_ids = [int(b) for b in bus_ids]

    @staticmethod
    def bus_column(bus: int) -> str:
        return f"bus_{bus}"

    @property
    def COLUMNS(self) -> List[str]:
        return ["timestamp"] + [self.bus_column(b) for b in self.bus_ids]

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"timestamp": "timestamp[s]"}
        out.update({self.bus_column(b): "float64" for b in self.bus_ids})
        return out


class TrajectorySchema:
    """Per-hour battery dispatch: net charge kW (+ charging) and SoC kWh per battery."""

    def __init__(self, buses: Sequence[int]) -> None:
        self.buses = [int(b) for b in buses]

    @property
    def COLUMNS(self) -> List[str]:
        cols = ["hour", "timestamp"]
        for b in self.buses:
            cols.extend([f"bus_{b}_kw", f"bus_{b}_soc_kwh"])
        return cols

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"hour": "int64", "timestamp": "timestamp[s]"}
        for b in self.buses:
            out[f"bus_{b}_kw"] = "float64"
            out[f"bus_{b}_soc_kwh"] = "float64"
        return out


class EnvelopeSchema:
    COLUMNS = ["hour", "timestamp", "v_min_before", "v_max_before", "v_min_after", "v_max_after"]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "hour": "int64",
            "timestamp": "timestamp[s]",
            "v_min_before": "float64",
            "v_max_before": "float64",
            "v_min_after": "float64",
            "v_max_after": "float64",
        }
