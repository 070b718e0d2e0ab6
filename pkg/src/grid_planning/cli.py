import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from grid_planning.battery import BatteryCount
from grid_planning.scenario import (
    CompareConfig,
    ScenarioConfig,
    compare,
    emit_envelope,
    emit_voltage_profile,
    load_books,
    load_inputs,
    read_scenario,
    run_scenario,
    solve_batteries,
    solve_reinforcement,
)


# ---------------- Scenario resolution ----------------

_PATHS = ("grid", "injections", "irradiance", "roofs", "load_profile", "costs")


def _scenario(args: argparse.Namespace) -> Tuple[ScenarioConfig, CompareConfig]:
    """Scenario file (if any) overlaid with the command-line flags."""
    overrides: Dict[str, Any] = {
        "grid": args.grid,
        "injections": args.injections,
        "irradiance": args.irradiance,
        "roofs": args.roofs,
        "load_profile": args.load,
        "costs": args.costs,
        "allow_curtailment": True if args.curtailment else None,
        "solver": args.solver,
        "workers": args.workers,
        "window_hours": args.window_hours,
    }
    if isinstance(getattr(args, "penetration", None), float):
        overrides["pv_penetration"] = args.penetration
    if isinstance(getattr(args, "v_limit", None), float):
        overrides["v_deviation_limit"] = args.v_limit
    if isinstance(getattr(args, "batteries", None), str):
        overrides["batteries"] = BatteryCount.parse(args.batteries)

    if args.scenario:
        base, matrix = read_scenario(args.scenario)
        return base.with_overrides(**overrides), matrix
    if not args.grid:
        raise ValueError("give --scenario or --grid")
    paths = {k: Path(v) for k, v in overrides.items() if k in _PATHS and v is not None}
    rest = {k: v for k, v in overrides.items() if k not in _PATHS and v is not None}
    return ScenarioConfig(**paths, **rest), CompareConfig()


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------- Commands ----------------


def cmd_validate(args: argparse.Namespace) -> int:
    from grid_planning.network import branches, load_grid

    if args.scenario or args.injections or args.irradiance:
        cfg, _ = _scenario(args)
        grid, series = load_inputs(cfg)
        hours = series.hours
    else:
        if not args.grid:
            raise ValueError("give --scenario or --grid")
        grid, hours = load_grid(args.grid), 0
    print(
        f"[validate] buses={grid.n_buses} segments={len(grid.segments)} "
        f"branches={len(branches(grid))} transformer={grid.transformer.rating_kva:g}kVA"
        + (f" hours={hours}" if hours else "")
    )
    return 0


def cmd_pv_profile(args: argparse.Namespace) -> int:
    from grid_planning.ingestion import gen_column, read_irradiance, read_roofs
    from grid_planning.network import load_grid
    from grid_planning.pv import bus_capacities, generation_profile
    from grid_planning.storage import TableWriter

    cfg, _ = _scenario(args)
    if cfg.irradiance is None or cfg.roofs is None:
        raise ValueError("pv-profile needs --irradiance and --roofs (or a scenario with them)")
    grid = load_grid(cfg.grid)
    irr = read_irradiance(cfg.irradiance, cfg.latitude, cfg.longitude)
    roofs = read_roofs(cfg.roofs)
    gen = generation_profile(irr, roofs, grid.n_buses, cfg.pv, cfg.pv_penetration)
    cap = bus_capacities(roofs, grid.n_buses, cfg.pv) * cfg.pv_penetration

    buses = [int(b) for b in np.flatnonzero(cap > 0)]
    columns: Dict[str, Any] = {"timestamp": np.asarray(irr.timestamp, dtype="datetime64[s]")}
    for b in buses:
        columns[gen_column(b)] = gen[:, b]
    out = TableWriter(decimals=4).write_csv(columns, _out_dir(args) / "pv_profile.csv")
    print(
        f"[pv-profile] roofs={len(roofs)} capacity={cap.sum():.1f}kWp "
        f"energy={gen.sum():.1f}kWh peak={gen.sum(axis=1).max(initial=0.0):.1f}kW out={out}"
    )
    return 0


def cmd_select_window(args: argparse.Namespace) -> int:
    from grid_planning.ingestion import write_injections

    cfg, _ = _scenario(args)
    bundle = run_scenario(cfg)
    out = _out_dir(args) / "window.csv"
    write_injections(bundle.window, out, bundle.grid)
    w = bundle.window
    print(
        f"[select-window] start={bundle.window_start} from={w.timestamps[0]} "
        f"to={w.timestamps[-1]} hours={w.hours} net={w.net_kw().sum():.1f}kWh out={out}"
    )
    return 0


def cmd_loadflow(args: argparse.Namespace) -> int:
    cfg, _ = _scenario(args)
    bundle = run_scenario(cfg)
    out = emit_voltage_profile(bundle, _out_dir(args) / "voltages_baseline.csv")
    v = bundle.baseline.v
    print(
        f"[loadflow] v-max={v.max():.4f} v-min={v.min():.4f} violations={len(bundle.violations)} "
        f"overloads={len(bundle.overloaded_segments)} losses={bundle.baseline.losses.sum():.1f}kWh "
        f"out={out}"
    )
    return 0


def cmd_reinforce(args: argparse.Namespace) -> int:
    from grid_planning.storage import write_reinforcement_plan

    cfg, _ = _scenario(args)
    _, grid_book = load_books(cfg)
    bundle = run_scenario(cfg)
    plan = solve_reinforcement(bundle, grid_book, cfg.workers)
    out = _out_dir(args)
    write_reinforcement_plan(plan, out / "reinforcement.json")
    emit_voltage_profile(bundle, out / "voltages_reinforced.csv", plan)
    emit_envelope(bundle, plan, out / "envelope_reinforcement.csv")
    print(
        f"[reinforce] actions={len(plan.actions)} transformer={plan.transformer_replaced} "
        f"capex={plan.total_capex:.2f} annual={plan.annual_cost:.2f} out={out}"
    )
    return 0


def cmd_place(args: argparse.Namespace) -> int:
    from grid_planning.storage import write_battery_plan, write_trajectories

    cfg, _ = _scenario(args)
    battery_book, _ = load_books(cfg)
    bundle = run_scenario(cfg)
    plan = solve_batteries(bundle, cfg.batteries, battery_book)
    out = _out_dir(args)
    write_battery_plan(plan, out / "batteries.json")
    write_trajectories(plan, out / "trajectories.csv")
    emit_voltage_profile(bundle, out / "voltages_batteries.csv", plan)
    emit_envelope(bundle, plan, out / "envelope_batteries.csv")
    sites = " ".join(f"{p.bus}:{p.capacity_kwh:.1f}kWh/{p.power_kw:.1f}kW" for p in plan.placements)
    print(
        f"[place] batteries={plan.count} capex={plan.capex:.2f} annual={plan.annual_cost:.2f} "
        f"proven={plan.proven_optimal} sites={sites or '-'} out={out}"
    )
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg, matrix = _scenario(args)
    matrix = CompareConfig(
        penetrations=tuple(args.penetration) if args.penetration else matrix.penetrations,
        limits=tuple(args.v_limit) if args.v_limit else matrix.limits,
        variants=tuple(args.batteries) if args.batteries else matrix.variants,
    )
    report = compare(cfg, matrix, books=load_books(cfg))
    out = _out_dir(args)
    report.write(out)
    sys.stdout.write((out / "report.csv").read_text(encoding="utf-8"))

    failed = report.failed_cells
    for cell in failed:
        for where, msg in sorted(cell.errors.items()):
            print(f"[compare] FAILED cell={cell.label} {where}: {msg}", file=sys.stderr)
    return 1 if failed else 0


def cmd_voltage_profile(args: argparse.Namespace) -> int:
    from grid_planning.storage import read_reinforcement_plan

    cfg, _ = _scenario(args)
    battery_book, grid_book = load_books(cfg)
    bundle = run_scenario(cfg)
    plan: Optional[Any] = None
    if args.plan:
        plan = read_reinforcement_plan(args.plan, grid_book, bundle.grid.transformer.replacement_cost)
    elif args.apply == "reinforcement":
        plan = solve_reinforcement(bundle, grid_book, cfg.workers)
    elif args.apply == "batteries":
        plan = solve_batteries(bundle, cfg.batteries, battery_book)
    tag = {"baseline": "baseline", "reinforcement": "reinforced", "batteries": "batteries"}[
        "reinforcement" if args.plan else args.apply
    ]
    fmt = args.format
    out = emit_voltage_profile(bundle, _out_dir(args) / f"voltages_{tag}.{fmt}", plan, fmt)
    print(f"[voltage-profile] hours={bundle.window.hours} buses={bundle.grid.n_buses} out={out}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    from grid_planning.ingestion import write_injections, write_irradiance, write_roofs
    from grid_planning.network import save_grid
    from grid_planning.network.synth import synthesize_case

    out = _out_dir(args)
    case = synthesize_case(args.buses, args.feeders, args.seed, args.days)
    save_grid(case.grid, out / "grid.json")
    write_injections(case.injections, out / "injections.csv", case.grid)
    write_irradiance(case.irradiance, out / "irradiance.csv")
    write_roofs(case.roofs, out / "roofs.json")
    scenario = {"grid": "grid.json", "injections": "injections.csv"}
    (out / "scenario.json").write_text(json.dumps(scenario, indent=2) + "\n", encoding="utf-8")
    print(
        f"[synth] buses={case.grid.n_buses} segments={len(case.grid.segments)} "
        f"hours={case.injections.hours} seed={args.seed} out={out}"
    )
    return 0


# ---------------- Parser ----------------


def _common(multi: bool = False) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--scenario", help="Scenario JSON (paths relative to the file)")
    p.add_argument("--grid", help="Grid JSON")
    p.add_argument("--injections", help="Injection CSV at full rooftop potential")
    p.add_argument("--irradiance", help="Irradiance CSV (with --roofs, instead of --injections)")
    p.add_argument("--roofs", help="Roof JSON")
    p.add_argument("--load", help="Load profile CSV (injection format) for the irradiance path")
    p.add_argument("--costs", help="Cost book JSON (defaults embedded)")
    p.add_argument("--out-dir", help="Output directory (default: .)")
    p.add_argument("--window-hours", type=int, help="Worst-window length (default 72)")
    p.add_argument("--curtailment", action="store_true", help="Allow PV curtailment")
    p.add_argument("--solver", choices=["simplex", "highs"], help="LP/MILP backend")
    p.add_argument("--workers", type=int, help="Thread pool size")
    if multi:
        p.add_argument("--penetration", type=float, nargs="+", help="PV penetrations (fractions)")
        p.add_argument("--v-limit", type=float, nargs="+", help="Voltage deviation limits")
        p.add_argument("--batteries", nargs="+", help="Battery variants: auto, n, =n, max-n")
    else:
        p.add_argument("--penetration", type=float, help="PV penetration (fraction)")
        p.add_argument("--v-limit", type=float, help="Voltage deviation limit (fraction)")
        p.add_argument("--batteries", help="Battery count: auto, n, =n or max-n")
    return p


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="grid-planning")
    p.add_argument("--verbose", action="store_true", help="Debug logging")
    sub = p.add_subparsers(dest="command", required=True)
    single, multi = _common(), _common(multi=True)

    sp = sub.add_parser("validate", parents=[single], help="check grid (and profile) files")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("pv-profile", parents=[single], help="PV generation per bus from irradiance and roofs")
    sp.set_defaults(func=cmd_pv_profile)

    sp = sub.add_parser("select-window", parents=[single], help="worst net-generation window")
    sp.set_defaults(func=cmd_select_window)

    sp = sub.add_parser("loadflow", parents=[single], help="baseline load flow of the worst window")
    sp.set_defaults(func=cmd_loadflow)

    sp = sub.add_parser("reinforce", parents=[single], help="grid reinforcement plan")
    sp.set_defaults(func=cmd_reinforce)

    sp = sub.add_parser("place", parents=[single], help="battery placement and sizing")
    sp.set_defaults(func=cmd_place)

    sp = sub.add_parser("compare", parents=[multi], help="reinforcement vs batteries over a scenario matrix")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("voltage-profile", parents=[single], help="per-hour, per-bus voltages of the window")
    sp.add_argument(
        "--apply",
        choices=["baseline", "reinforcement", "batteries"],
        default="baseline",
        help="Plan to apply before the load flow",
    )
    sp.add_argument("--plan", help="Reinforcement plan JSON to apply instead of solving")
    sp.add_argument(
        "--format",
        choices=["csv", "parquet"],
        default="csv",
        help="Table format of the profile (default: csv)",
    )
    sp.set_defaults(func=cmd_voltage_profile)

    sp = sub.add_parser("synth", help="write a synthetic feeder with profiles")
    sp.add_argument("--out-dir", help="Output directory (default: .)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--buses", type=int, default=106)
    sp.add_argument("--feeders", type=int, default=4)
    sp.add_argument("--days", type=int, default=14)
    sp.set_defaults(func=cmd_synth)

    return p


def main(argv: Optional[List[str]] = None) -> None:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(message)s",
        stream=sys.stderr,
    )
    try:
        rc = args.func(args)
    except (ValueError, FileNotFoundError, RuntimeError) as e:
        print(f"[{args.command}] error: {e}", file=sys.stderr)
        rc = 1
    sys.exit(rc)
