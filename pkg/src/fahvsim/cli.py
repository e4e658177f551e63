"""Command-line front end: run / compare / sweep / check.

Exit codes: 0 success, 1 claim or criterion failure (including divergence),
2 usage or validation errors.
"""

from __future__ import annotations

import argparse
import copy
import itertools
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import acceptance
from .config import apply_overrides, parse_config, serialize_config
from .engine import ScenarioConfig, TrajectoryLog, run_scenario
from .errors import (BoundBreach, Divergence, FahvsimError,
                     NonFiniteDerivative, ParseError, ValidationError)
from .ppc import beta_for_initial_error
from .svgplot import Panel, write_svg


def _load_config(args) -> ScenarioConfig:
    if args.scenario:
        text = Path(args.scenario).read_text(encoding="utf-8")
        cfg = parse_config(text)
    else:
        cfg = ScenarioConfig()
    if args.set:
        apply_overrides(cfg, args.set)
    else:
        cfg.validate()
    return cfg


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_plots(log: TrajectoryLog, out: Path) -> list[Path]:
    t = log.t
    paths = []

    p1 = Panel("velocity tracking error", "t [s]", "e_V [ft/s]")
    p1.line("e_V", t, log.column("e_V"))
    p1.line("phi*e_V", t, log.column("phi_V") * log.column("e_V"))
    p1.line("+rho", t, log.column("rho_V"), color="#444444", dash="5,4")
    p1.line("-rho", t, -log.column("rho_V"), color="#444444", dash="5,4")
    p2 = Panel("altitude tracking error", "t [s]", "e_h [ft]")
    p2.line("e_h", t, log.column("e_h"))
    p2.line("phi*e_h", t, log.column("phi_h") * log.column("e_h"))
    p2.line("+rho", t, log.column("rho_h"), color="#444444", dash="5,4")
    p2.line("-rho", t, -log.column("rho_h"), color="#444444", dash="5,4")
    paths.append(out / "tracking_errors.svg")
    write_svg(paths[-1], [p1, p2])

    panels = [
        Panel("velocity vs command", "t [s]", "V [ft/s]")
        .line("V", t, log.column("V")).line("V_d", t, log.column("V_d"),
                                            dash="5,4"),
        Panel("altitude vs command", "t [s]", "h [ft]")
        .line("h", t, log.column("h")).line("h_d", t, log.column("h_d"),
                                            dash="5,4"),
        Panel("fuel equivalence ratio", "t [s]", "Phi")
        .line("commanded", t, log.column("Phi_cmd"))
        .line("effective", t, log.column("Phi_eff"), dash="5,4"),
        Panel("elevator deflection", "t [s]", "delta_e [rad]")
        .line("commanded", t, log.column("delta_e_cmd"))
        .line("effective", t, log.column("delta_e_eff"), dash="5,4"),
    ]
    paths.append(out / "commands.svg")
    write_svg(paths[-1], panels)

    panels = []
    for ch, unit in (("V", "ft/s^2"), ("h", "ft/s"), ("gamma", "rad/s"),
                     ("theta", "rad/s"), ("Q", "rad/s^2")):
        p = Panel(f"lumped disturbance, {ch} channel", "t [s]", unit)
        p.line("true", t, log.column(f"D_{ch}"))
        p.line("estimate", t, log.column(f"dhat_{ch}"), dash="5,4")
        panels.append(p)
    paths.append(out / "disturbance_estimates.svg")
    write_svg(paths[-1], panels)

    panels = [
        Panel("flight path angle reconstruction", "t [s]", "gamma [rad]")
        .line("true", t, log.column("gamma"))
        .line("reconstructed", t, log.column("gamma_hat"), dash="5,4"),
        Panel("angle of attack reconstruction", "t [s]", "alpha [rad]")
        .line("true", t, log.column("alpha"))
        .line("reconstructed", t, log.column("alpha_hat"), dash="5,4"),
    ]
    paths.append(out / "reconstruction.svg")
    write_svg(paths[-1], panels)
    return paths


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args)
    try:
        log, metrics = run_scenario(cfg)
    except BoundBreach as exc:
        if exc.log is not None:
            exc.log.to_csv(out / "trajectory.csv")
        print(f"bound breach (strict mode): {exc}", file=sys.stderr)
        return 1
    except (Divergence, NonFiniteDerivative) as exc:
        if exc.log is not None:
            exc.log.to_csv(out / "trajectory.csv")
        print(f"integration failed: {exc}", file=sys.stderr)
        return 1
    log.to_csv(out / "trajectory.csv")
    (out / "metrics.txt").write_text(metrics.summary(), encoding="utf-8")
    (out / "scenario.cfg").write_text(serialize_config(cfg), encoding="utf-8")
    if not args.no_plot:
        write_plots(log, out)
    print(metrics.summary(), end="")
    return 0


def _run_variant(cfg: ScenarioConfig, variant: str):
    c = replace(cfg, variant=variant)
    try:
        log, metrics = run_scenario(c)
        return {"variant": variant, "log": log, "metrics": metrics,
                "status": "ok"}
    except FahvsimError as exc:
        return {"variant": variant, "log": getattr(exc, "log", None),
                "metrics": None,
                "status": f"{type(exc).__name__}: {exc}"}


def cmd_compare(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(lambda v: _run_variant(cfg, v),
                                ("proposed", "baseline")))
    lines = ["variant        status  viol_V  viol_H  max|eV|>Ts  max|eH|>Ts  "
             "peakPhi  peakDelta"]
    panels = {}
    for r in results:
        if r["metrics"] is not None:
            m = r["metrics"]
            x = m.exact
            lines.append(
                f"{r['variant']:<14s} ok      {x.viol_count_v:6d}  "
                f"{x.viol_count_h:6d}  {x.max_ev_post_ts:10.4f}  "
                f"{x.max_eh_post_ts:10.4f}  {m.peak_phi_cmd:7.3f}  "
                f"{m.peak_delta_cmd:9.4f}")
        else:
            lines.append(f"{r['variant']:<14s} {r['status']}")
        if r["log"] is not None:
            r["log"].to_csv(out / f"trajectory_{r['variant']}.csv")
            panels[r["variant"]] = r["log"]
    report = "\n".join(lines) + "\n"
    (out / "comparison.txt").write_text(report, encoding="utf-8")
    if not args.no_plot and panels:
        plots = []
        for col, unit in (("e_V", "ft/s"), ("e_h", "ft")):
            p = Panel(f"{col}: proposed vs baseline", "t [s]", unit)
            for name, lg in panels.items():
                p.line(name, lg.t, lg.column(col))
            any_log = next(iter(panels.values()))
            rho_col = "rho_V" if col == "e_V" else "rho_h"
            p.line("+rho", any_log.t, any_log.column(rho_col),
                   color="#444444", dash="5,4")
            p.line("-rho", any_log.t, -any_log.column(rho_col),
                   color="#444444", dash="5,4")
            plots.append(p)
        write_svg(out / "comparison.svg", plots)
    print(report, end="")
    return 0


def _parse_grid(items: list[str]) -> list[tuple[str, list[str]]]:
    grid = []
    for item in items:
        if "=" not in item:
            raise ValidationError(f"grid spec {item!r} is not key=v1,v2,...",
                                  key=item, constraint="key=v1,v2")
        key, _, values = item.partition("=")
        grid.append((key.strip(), [v.strip() for v in values.split(",")]))
    return grid


def _sweep_cell(cfg: ScenarioConfig, assignment: list[tuple[str, str]]):
    # overrides mutate nested sections, so each cell needs its own deep copy
    cell = copy.deepcopy(cfg)
    resolved = []
    for key, value in assignment:
        if value == "auto" and key in ("transform.altitude.beta",
                                       "transform.velocity.beta"):
            if key.startswith("transform.altitude"):
                e0, rho0 = cell.initial.h_err, cell.perf_h.xi_a
            else:
                e0, rho0 = cell.initial.v_err, cell.perf_v.xi_a
            value = repr(beta_for_initial_error(e0, rho0))
        resolved.append(f"{key}={value}")
    apply_overrides(cell, resolved)
    label = ",".join(resolved)
    try:
        _, metrics = run_scenario(cell)
        return label, metrics, "ok"
    except FahvsimError as exc:
        return label, None, f"{type(exc).__name__}"


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args)
    grid = _parse_grid(args.grid or [])
    if not grid:
        print("sweep requires at least one --grid key=v1,v2,...",
              file=sys.stderr)
        return 2
    keys = [k for k, _ in grid]
    cells = [list(zip(keys, combo))
             for combo in itertools.product(*[v for _, v in grid])]
    if args.sample and args.sample < len(cells):
        picked = sorted(random.Random(args.seed).sample(range(len(cells)),
                                                        args.sample))
        cells = [cells[i] for i in picked]
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        rows = list(pool.map(lambda a: _sweep_cell(cfg, a), cells))
    header = ("cell,status,viol_V,viol_H,max_eV_post_Ts,max_eH_post_Ts,"
              "peak_phi,peak_delta")
    lines = [header]
    for label, metrics, status in rows:
        if metrics is None:
            lines.append(f"\"{label}\",{status},,,,,,")
            continue
        x = metrics.exact
        lines.append(f"\"{label}\",{status},{x.viol_count_v},{x.viol_count_h},"
                     f"{x.max_ev_post_ts:.6g},{x.max_eh_post_ts:.6g},"
                     f"{metrics.peak_phi_cmd:.6g},{metrics.peak_delta_cmd:.6g}")
    report = "\n".join(lines) + "\n"
    (out / "sweep.csv").write_text(report, encoding="utf-8")
    print(report, end="")
    return 0


def cmd_check(args) -> int:
    cfg = _load_config(args)
    out = _outdir(args)
    results = acceptance.run_all(cfg)
    report = acceptance.format_report(results)
    (out / "acceptance.txt").write_text(report, encoding="utf-8")
    print(report, end="")
    return 0 if all(r.gate for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fahvsim",
        description="Hypersonic longitudinal tracking-control experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("compare", cmd_compare),
                     ("sweep", cmd_sweep), ("check", cmd_check)):
        p = sub.add_parser(name)
        p.add_argument("--scenario", help="scenario file path")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a configuration key (repeatable)")
        p.add_argument("--no-plot", action="store_true")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized sweep sampling")
        p.set_defaults(fn=fn)
    sub.choices["sweep"].add_argument(
        "--grid", action="append", metavar="KEY=V1,V2",
        help="grid axis; value 'auto' picks beta from the initial error")
    sub.choices["sweep"].add_argument(
        "--sample", type=int, default=0,
        help="run only N randomly chosen cells of the grid (uses --seed)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ParseError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"file not found: {exc}", file=sys.stderr)
        return 2
    except FahvsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
