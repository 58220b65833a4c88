"""Command-line surface: pde run, ode run, eig, verify, sweep."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import __version__
from .config import KNOWN_CHECKS, ScenarioConfig, bundled_scenarios, load_scenario
from .errors import GbmsimError
from .grid import ScalarField, write_snapshot
from .kinetics import StateTriple
from .ode import integrate
from .pde import SnapshotObserver
from .runner import gate_holds, run_scenario, write_outputs
from .spectral import lambda1


def _add_common(sub):
    sub.add_argument("scenario", nargs="?", help="bundled scenario name or config path")
    sub.add_argument("--config", help="explicit config file path")
    sub.add_argument("--out", help="output directory (overrides [output] dir)")
    sub.add_argument("--dt", type=float, help="time step override (day)")
    sub.add_argument("--t-end", type=float, dest="t_end", help="final time override (day)")
    sub.add_argument("--grid", nargs=2, type=int, metavar=("NX", "NY"),
                     help="grid resolution override")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for randomized scenario variants (reserved)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbmsim",
        description="Simulate the tumor/necrosis/vasculature model and verify "
                    "its decay envelopes and invariants.")
    parser.add_argument("--version", action="version", version=f"gbmsim {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    pde_cmd = commands.add_parser("pde", help="grid simulations")
    pde_sub = pde_cmd.add_subparsers(dest="action", required=True)
    _add_common(pde_sub.add_parser("run", help="run a scenario, write series, "
                                               "snapshots and verdicts"))

    ode_cmd = commands.add_parser("ode", help="pointwise (uniform) runs")
    ode_sub = ode_cmd.add_subparsers(dest="action", required=True)
    _add_common(ode_sub.add_parser("run", help="integrate the uniform dynamics "
                                               "of a scenario"))

    eig = commands.add_parser("eig", help="first eigenvalue of -Lap + beta1*N0")
    _add_common(eig)
    eig.add_argument("--field-out", help="write the eigenfield snapshot here")
    eig.add_argument("--tol", type=float, default=1e-10)

    verify = commands.add_parser("verify", help="run a scenario and emit verdicts")
    _add_common(verify)

    sweep = commands.add_parser("sweep", help="evaluate a check's gate over a "
                                              "parameter axis")
    sweep.add_argument("param", help="parameter name, e.g. delta")
    sweep.add_argument("values", help="comma list '0.1,0.2' or range 'a..b:n'")
    sweep.add_argument("--check", required=True, choices=KNOWN_CHECKS)
    _add_common(sweep)
    return parser


def _load(args) -> ScenarioConfig:
    target = args.config or args.scenario
    if target is None:
        raise GbmsimError("no scenario given; bundled scenarios: "
                          + ", ".join(bundled_scenarios()))
    cfg = load_scenario(target)
    replacements = {}
    if args.dt is not None:
        replacements["dt"] = args.dt
    if args.t_end is not None:
        replacements["t_end"] = args.t_end
    if args.grid is not None:
        replacements["grid"] = dataclasses.replace(cfg.grid, nx=args.grid[0],
                                                   ny=args.grid[1])
    if args.out is not None:
        replacements["output_dir"] = args.out
    if replacements:
        cfg = dataclasses.replace(cfg, **replacements)
        cfg = dataclasses.replace(
            cfg, cells=tuple((i, j) for i, j in cfg.cells
                             if i < cfg.grid.nx and j < cfg.grid.ny))
        if cfg.dt > cfg.dt_cap:
            raise GbmsimError(f"dt = {cfg.dt} exceeds the explicit-reaction cap "
                              f"{cfg.dt_cap:.6g} for this horizon")
    return cfg


def _fail_summary(cfg, report) -> str:
    failed = [dataclasses.asdict(v) for v in report.verdicts.values() if not v.passed]
    return json.dumps({"scenario": cfg.name,
                       "violations": len(report.violations),
                       "failed_checks": failed}, sort_keys=True)


def _exit_code(report) -> int:
    ok = not report.violations and all(v.passed for v in report.verdicts.values())
    return 0 if ok else 1


def cmd_pde_run(args) -> int:
    cfg = _load(args)
    outdir = cfg.output_dir
    # initial and final fields are always written; denser cadence on request
    every = cfg.snapshot_every if cfg.snapshot_every > 0.0 else cfg.t_end
    observers = [SnapshotObserver(os.path.join(outdir, "snapshots"), every)]
    report = run_scenario(cfg, observers=observers)
    write_outputs(outdir, cfg, report)
    print(f"{cfg.name}: {len(report.series['t'])} samples -> {outdir}")
    if _exit_code(report):
        print(_fail_summary(cfg, report))
        return 1
    return 0


def cmd_ode_run(args) -> int:
    cfg = _load(args)
    if cfg.bumps:
        raise GbmsimError("ode run needs a spatially uniform scenario "
                          "(tumor_bumps = none)")
    s0 = StateTriple(cfg.tumor0, cfg.necrosis0, cfg.vasculature0)
    sol = integrate(s0, cfg.t_end, cfg.dt, cfg.params)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = os.path.join(cfg.output_dir, "ode_series.csv")
    stride = max(1, round(cfg.series_every / cfg.dt))
    with open(path, "w") as fh:
        fh.write("t,T,N,Phi\n")
        for k in range(0, sol.times.size, stride):
            fh.write(f"{float(sol.times[k])!r},{float(sol.states[k, 0])!r},"
                     f"{float(sol.states[k, 1])!r},{float(sol.states[k, 2])!r}\n")
    final = sol.final()
    print(f"{cfg.name}: final state T={final.T:.6g} N={final.N:.6g} "
          f"Phi={final.Phi:.6g} -> {path}")
    return 0


def cmd_eig(args) -> int:
    cfg = _load(args)
    n0 = ScalarField.constant(cfg.grid, cfg.necrosis0)
    weighted = ScalarField(cfg.grid, cfg.params.beta1 * n0.values)
    result = lambda1(weighted, tol=args.tol)
    print(f"lambda1 = {result.lambda1!r}")
    print(f"iterations = {result.iterations}")
    print(f"residual = {result.residual!r}")
    if args.field_out:
        write_snapshot(args.field_out, result.eigenfield, 0.0)
        print(f"eigenfield -> {args.field_out}")
    return 0


def cmd_verify(args) -> int:
    cfg = _load(args)
    report = run_scenario(cfg)
    write_outputs(cfg.output_dir, cfg, report)
    for name in sorted(report.verdicts):
        v = report.verdicts[name]
        print(f"{'PASS' if v.passed else 'FAIL'}  {name}  "
              f"worst_ratio={v.worst_ratio:.6g} at t={v.t_worst:.6g}")
    print(f"in-loop violations: {len(report.violations)}")
    if _exit_code(report):
        print(_fail_summary(cfg, report))
        return 1
    return 0


def _parse_values(text: str) -> list[float]:
    if ".." in text:
        span, _, count = text.partition(":")
        lo, _, hi = span.partition("..")
        n = int(count) if count else 11
        return [float(v) for v in np.linspace(float(lo), float(hi), n)]
    return [float(v) for v in text.split(",") if v.strip()]


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if args.param not in ("rho", "alpha", "beta1", "beta2", "gamma", "delta",
                          "K", "kappa0"):
        raise GbmsimError(f"unknown parameter {args.param!r}")
    rows = []
    for value in _parse_values(args.values):
        params = dataclasses.replace(cfg.params, **{args.param: value})
        point = dataclasses.replace(cfg, params=params)
        verdict = gate_holds(args.check, point)
        rows.append((value, verdict))
        print(f"{args.param}={value!r} {args.check}: "
              f"{'pass' if verdict else 'fail'}")
    outdir = args.out or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "sweep.csv"), "w") as fh:
        fh.write(f"{args.param},check,verdict\n")
        for value, verdict in rows:
            fh.write(f"{value!r},{args.check},{'pass' if verdict else 'fail'}\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "pde":
            return cmd_pde_run(args)
        if args.command == "ode":
            return cmd_ode_run(args)
        if args.command == "eig":
            return cmd_eig(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "sweep":
            return cmd_sweep(args)
    except GbmsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
