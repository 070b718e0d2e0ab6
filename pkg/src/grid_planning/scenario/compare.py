"""Reinforcement against battery storage over a matrix of scenario cells."""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from grid_planning.battery import BatteryCount, BatteryPlan, plan_injections
from grid_planning.costs import BatteryCostBook, GridCostBook
from grid_planning.network import GridNetwork, InjectionSeries
from grid_planning.powerflow import loadflow_series
from grid_planning.reinforcement import ReinforcementPlan
from grid_planning.scenario.config import CompareConfig, ScenarioConfig
from grid_planning.scenario.runner import (
    ScenarioBundle,
    load_inputs,
    run_scenario,
    solve_batteries,
    solve_reinforcement,
)
from grid_planning.storage import (
    ReportSchema,
    TableWriter,
    format_float,
    variant_prefix,
    write_battery_plan,
    write_json,
    write_reinforcement_plan,
)

log = logging.getLogger(__name__)

KEUR_DECIMALS = 1


def cell_label(penetration: float, v_limit: float) -> str:
    """Stable file-name tag of a cell: (0.5, 0.03) -> p50_v3."""
    return f"p{penetration * 100:g}_v{v_limit * 100:g}"


def _keur(eur: float) -> float:
    return eur / 1000.0


def _envelope(v: np.ndarray) -> Dict[str, List[float]]:
    return {
        "v_min": [round(float(x), 6) for x in v.min(axis=1)],
        "v_max": [round(float(x), 6) for x in v.max(axis=1)],
    }


# ---------------- Cell results ----------------


@dataclass
class CellResult:
    penetration: float
    v_limit: float
    status: str = "ok"  # ok / no-violations / failed
    violations: int = 0
    reinforcement: Optional[ReinforcementPlan] = None
    batteries: Dict[str, BatteryPlan] = field(default_factory=dict)
    envelopes: Dict[str, Dict[str, List[float]]] = field(default_factory=dict)
    errors: Dict[str, str] = field(default_factory=dict)

    @property
    def label(self) -> str:
        return cell_label(self.penetration, self.v_limit)

    @property
    def failed(self) -> bool:
        return bool(self.errors)

    def row(self, variants: Tuple[str, ...]) -> Dict[str, Any]:
        r: Dict[str, Any] = {
            "penetration": format_float(self.penetration, 2),
            "v_limit": format_float(self.v_limit, 3),
            "status": self.status,
            "violations": self.violations,
        }
        if self.reinforcement is not None:
            r["reinforcement_capex_keur"] = format_float(
                _keur(self.reinforcement.total_capex), KEUR_DECIMALS
            )
            r["reinforcement_annual_keur"] = format_float(
                _keur(self.reinforcement.annual_cost), KEUR_DECIMALS
            )
            r["transformer_replaced"] = self.reinforcement.transformer_replaced
        for label in variants:
            plan = self.batteries.get(label)
            if plan is None:
                continue
            prefix = variant_prefix(label)
            r[f"{prefix}_count"] = plan.count
            r[f"{prefix}_capacity_kwh"] = format_float(plan.total_capacity_kwh, 1)
            r[f"{prefix}_capex_keur"] = format_float(_keur(plan.capex), KEUR_DECIMALS)
            r[f"{prefix}_annual_keur"] = format_float(_keur(plan.annual_cost), KEUR_DECIMALS)
        return r

    def to_dict(self, variants: Tuple[str, ...]) -> Dict[str, Any]:
        return {
            "cell": self.label,
            "penetration": self.penetration,
            "v_limit": self.v_limit,
            "status": self.status,
            "violations": self.violations,
            "reinforcement": None if self.reinforcement is None else self.reinforcement.to_dict(),
            "batteries": {
                label: self.batteries[label].to_dict()
                for label in variants
                if label in self.batteries
            },
            "envelopes": self.envelopes,
            "errors": dict(sorted(self.errors.items())),
        }


@dataclass(frozen=True)
class ComparisonReport:
    variants: Tuple[str, ...]
    cells: Tuple[CellResult, ...]

    @property
    def schema(self) -> ReportSchema:
        return ReportSchema(self.variants)

    @property
    def failed_cells(self) -> List[CellResult]:
        return [c for c in self.cells if c.failed]

    def rows(self) -> List[Dict[str, Any]]:
        return [c.row(self.variants) for c in self.cells]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variants": list(self.variants),
            "columns": self.schema.COLUMNS,
            "rows": self.rows(),
            "cells": [c.to_dict(self.variants) for c in self.cells],
        }

    def write(self, out_dir: str | Path) -> List[Path]:
        """report.csv, report.json and one plan JSON per cell and planner."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [
            TableWriter().write_rows(self.rows(), self.schema.COLUMNS, out / "report.csv"),
            write_json(self.to_dict(), out / "report.json"),
        ]
        for c in self.cells:
            if c.reinforcement is not None:
                written.append(
                    write_reinforcement_plan(c.reinforcement, out / f"reinforcement_{c.label}.json")
                )
            for label in self.variants:
                if label in c.batteries:
                    tag = variant_prefix(label).removeprefix("battery_")
                    written.append(
                        write_battery_plan(c.batteries[label], out / f"batteries_{c.label}_{tag}.json")
                    )
        return written


# ---------------- Cells ----------------


def _replay_envelope(
    bundle: ScenarioBundle, grid: GridNetwork, series: InjectionSeries
) -> Dict[str, List[float]]:
    cfg = bundle.config
    sol = loadflow_series(grid, series.pu(grid, cfg.power_factor), cfg.slack_v)
    return _envelope(sol.v)


def run_cell(
    base: ScenarioConfig,
    penetration: float,
    v_limit: float,
    variants: Tuple[str, ...],
    grid: GridNetwork,
    injections: InjectionSeries,
    battery_book: BatteryCostBook,
    grid_book: GridCostBook,
) -> CellResult:
    """One cell; planner failures are recorded, never raised."""
    result = CellResult(penetration, v_limit)
    try:
        config = dataclasses.replace(base, pv_penetration=penetration, v_deviation_limit=v_limit)
        bundle = run_scenario(config, grid=grid, injections=injections)
    except Exception as exc:  # noqa: BLE001
        result.status = "failed"
        result.errors["scenario"] = f"{type(exc).__name__}: {exc}"
        log.error("[compare] cell=%s scenario failed: %s", result.label, exc)
        return result

    result.violations = len(bundle.violations)
    result.envelopes["baseline"] = _envelope(bundle.baseline.v)
    if not bundle.has_violations:
        result.status = "no-violations"
        result.reinforcement = solve_reinforcement(bundle, grid_book)
        for label in variants:
            result.batteries[label] = solve_batteries(bundle, None, battery_book)
        log.info("[compare] cell=%s no violations", result.label)
        return result

    try:
        plan = solve_reinforcement(bundle, grid_book)
        result.reinforcement = plan
        result.envelopes["reinforcement"] = _replay_envelope(
            bundle, plan.apply(bundle.grid), bundle.window
        )
    except Exception as exc:  # noqa: BLE001
        result.errors["reinforcement"] = f"{type(exc).__name__}: {exc}"
        log.error("[compare] cell=%s reinforcement failed: %s", result.label, exc)

    for label in variants:
        try:
            bplan = solve_batteries(bundle, BatteryCount.parse(label), battery_book)
            result.batteries[label] = bplan
            result.envelopes[variant_prefix(label)] = _replay_envelope(
                bundle, bundle.grid, plan_injections(bundle.window, bplan)
            )
        except Exception as exc:  # noqa: BLE001
            result.errors[label] = f"{type(exc).__name__}: {exc}"
            log.error("[compare] cell=%s batteries %s failed: %s", result.label, label, exc)

    if result.errors:
        result.status = "failed"
    log.info(
        "[compare] cell=%s status=%s reinforcement=%s batteries=%s",
        result.label,
        result.status,
        "-" if result.reinforcement is None else f"{result.reinforcement.total_capex:.0f}",
        {k: f"{v.capex:.0f}" for k, v in result.batteries.items()},
    )
    return result


def compare(
    base: ScenarioConfig,
    matrix: CompareConfig = CompareConfig(),
    *,
    grid: Optional[GridNetwork] = None,
    injections: Optional[InjectionSeries] = None,
    books: Optional[Tuple[BatteryCostBook, GridCostBook]] = None,
    workers: Optional[int] = None,
) -> ComparisonReport:
    """
    Run every (penetration, limit) cell of ``matrix`` on one grid, cells in
    parallel, results in matrix order.
    """
    if grid is None or injections is None:
        loaded_grid, loaded_series = load_inputs(base)
        grid = loaded_grid if grid is None else grid
        injections = loaded_series if injections is None else injections
    if books is None:
        from grid_planning.costs import load_costbook

        books = load_costbook(base.costs)
    battery_book, grid_book = books
    n_workers = base.workers if workers is None else workers

    def run(cell: Tuple[float, float]) -> CellResult:
        return run_cell(
            base, cell[0], cell[1], matrix.variants, grid, injections, battery_book, grid_book
        )

    log.info("[compare] cells=%d variants=%s workers=%d", len(matrix.cells), list(matrix.variants), n_workers)
    with ThreadPoolExecutor(max_workers=max(1, n_workers)) as pool:
        cells = tuple(pool.map(run, matrix.cells))
    return ComparisonReport(matrix.variants, cells)
