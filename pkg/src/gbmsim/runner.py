"""Scenario orchestration: initial data, simulation, checks, output files."""

from __future__ import annotations

import math
import os

import numpy as np

from . import analysis, pde
from .analysis import (BoxMonitor, CheckVerdict, MonotoneNecrosisMonitor,
                       RunReport, check_envelope, necrosis_bound,
                       necrosis_settled_check, phi_vanishing_check)
from .config import ScenarioConfig
from .grid import GridState, ScalarField
from .spectral import check_rho_condition

__all__ = ["initial_state", "run_scenario", "evaluate_checks",
           "write_outputs", "gate_holds"]


def tumor_profile(cfg: ScenarioConfig) -> np.ndarray:
    """Initial tumor: uniform level plus Gaussian seeds, clamped to [0, K]."""
    X, Y = cfg.grid.centers()
    values = np.full_like(X, cfg.tumor0)
    for b in cfg.bumps:
        values += b.amplitude * np.exp(-((X - b.cx) ** 2 + (Y - b.cy) ** 2)
                                       / (2.0 * b.sigma ** 2))
    return np.clip(values, 0.0, cfg.params.K)


def initial_state(cfg: ScenarioConfig) -> GridState:
    g = cfg.grid
    return GridState(
        t=0.0,
        T=ScalarField(g, tumor_profile(cfg)),
        N=ScalarField.constant(g, cfg.necrosis0),
        Phi=ScalarField.constant(g, cfg.vasculature0),
    )


def run_scenario(cfg: ScenarioConfig, observers=()) -> RunReport:
    """Simulate a scenario with its in-loop monitors, then evaluate its
    configured checks into the report's verdicts."""
    state = initial_state(cfg)
    monitors = []
    if "apriori_box" in cfg.checks:
        n_upper = min(necrosis_bound(cfg.params, cfg.t_end, cfg.necrosis0),
                      cfg.n_cap * cfg.params.K)
        monitors.append(BoxMonitor(cfg.params, n_upper, cfg.box_tol))
    if "necrosis_monotone" in cfg.checks:
        monitors.append(MonotoneNecrosisMonitor(cfg.monotone_tol))
    report = pde.run_simulation(
        state, cfg.t_end, cfg.dt, cfg.params,
        observers=observers, monitors=monitors, cells=cfg.cells,
        series_every=cfg.series_every, linear_solver=cfg.solver)
    report.verdicts.update(evaluate_checks(cfg, report))
    return report


def gate_holds(check: str, cfg: ScenarioConfig) -> bool:
    """Whether a check's parameter condition holds for this scenario (no
    simulation): the decay regimes gate on the coefficients and initial
    necrosis alone."""
    p = cfg.params
    if check == "envelope_destruction_dominant":
        return p.delta >= p.gamma / p.K
    if check == "envelope_eigenvalue_gated":
        n0 = ScalarField.constant(cfg.grid, cfg.necrosis0)
        return check_rho_condition(p, n0).satisfied
    if check == "envelope_near_capacity":
        if not 0.0 < cfg.eps < p.K:
            return False
        env = analysis.envelopes_near_capacity(p, cfg.eps, 1.0, 1.0)
        return env is not None
    return True  # box / monotonicity / vanishing checks need no gate


def _mask(times, warmup):
    times = np.asarray(times)
    return times >= warmup


def evaluate_checks(cfg: ScenarioConfig, report: RunReport) -> dict[str, CheckVerdict]:
    """Evaluate every configured check against a finished run."""
    verdicts: dict[str, CheckVerdict] = {}
    p = cfg.params
    times = report.times
    keep = _mask(times, cfg.warmup)
    t = times[keep]
    tmax = report.series["Tmax"][keep]
    phimax = report.series["Phimax"][keep]
    nmax = report.series["Nmax"][keep]
    t0_max = float(report.series["Tmax"][0])
    phi0_max = float(report.series["Phimax"][0])

    for check in cfg.checks:
        if check == "apriori_box":
            bad = [v for v in report.violations if v.monitor.startswith("apriori_box")]
            worst = max((v.magnitude for v in bad), default=0.0)
            when = next((v.t for v in bad if v.magnitude == worst), float(times[-1]))
            verdicts[check] = CheckVerdict(check, not bad, worst, when)
        elif check == "necrosis_monotone":
            bad = [v for v in report.violations if v.monitor == "necrosis_monotone"]
            worst = max((v.magnitude for v in bad), default=0.0)
            when = next((v.t for v in bad if v.magnitude == worst), float(times[-1]))
            verdicts[check] = CheckVerdict(check, not bad, worst, when)
        elif check == "envelope_destruction_dominant":
            pair = analysis.envelopes_destruction_dominant(
                p, cfg.necrosis0, phi0_max, t0_max)
            _envelope_verdicts(verdicts, check, pair, t, tmax, phimax, cfg.slack)
        elif check == "envelope_eigenvalue_gated":
            hit = analysis.find_phi_handoff_time(t, tmax, p, cfg.necrosis0)
            if hit is None:
                verdicts[check] = CheckVerdict(check, False, math.inf, float(t[-1]))
                continue
            t_star, idx = hit
            n0 = ScalarField.constant(cfg.grid, cfg.necrosis0)
            pair = analysis.envelopes_eigenvalue_gated(
                p, n0, t0_max, float(phimax[idx]), t_star)
            _envelope_verdicts(verdicts, check, pair, t, tmax, phimax, cfg.slack)
        elif check == "envelope_near_capacity":
            pair = analysis.envelopes_near_capacity(p, cfg.eps, t0_max, phi0_max)
            _envelope_verdicts(verdicts, check, pair, t, tmax, phimax, cfg.slack)
        elif check == "phi_vanishing":
            phi_by_cell = {c: tr["Phi"][keep] for c, tr in report.cell_series.items()}
            if not phi_by_cell:
                phi_by_cell = {("max", "max"): phimax}
            verdicts[check] = phi_vanishing_check(
                t, phi_by_cell, cfg.phi_threshold, cfg.phi_horizon, name=check)
        elif check == "necrosis_settled":
            verdicts[check] = necrosis_settled_check(t, nmax, name=check)
    return verdicts


def _envelope_verdicts(verdicts, check, pair, times, tmax, phimax, slack):
    if pair is None:
        verdicts[check] = CheckVerdict(check, False, math.inf, float(times[0]))
        return
    verdicts[f"{check}:T"] = check_envelope(times, tmax, pair.tumor, slack,
                                            name=f"{check}:T")
    verdicts[f"{check}:Phi"] = check_envelope(times, phimax, pair.vasculature, slack,
                                              name=f"{check}:Phi")
    both = verdicts[f"{check}:T"].passed and verdicts[f"{check}:Phi"].passed
    worst = max(verdicts[f"{check}:T"].worst_ratio, verdicts[f"{check}:Phi"].worst_ratio)
    when = (verdicts[f"{check}:T"].t_worst
            if verdicts[f"{check}:T"].worst_ratio >= verdicts[f"{check}:Phi"].worst_ratio
            else verdicts[f"{check}:Phi"].t_worst)
    verdicts[check] = CheckVerdict(check, both, worst, when)


def write_outputs(outdir: str, cfg: ScenarioConfig, report: RunReport,
                  final_state: GridState | None = None) -> None:
    """series.csv, verdicts.csv and a readable verdicts.txt in outdir."""
    os.makedirs(outdir, exist_ok=True)
    pde.write_series_csv(os.path.join(outdir, "series.csv"), report)
    with open(os.path.join(outdir, "verdicts.csv"), "w") as fh:
        fh.write("monitor,verdict,worst_ratio,t_worst\n")
        for name in sorted(report.verdicts):
            v = report.verdicts[name]
            fh.write(f"{name},{'pass' if v.passed else 'fail'},"
                     f"{v.worst_ratio!r},{v.t_worst!r}\n")
    with open(os.path.join(outdir, "verdicts.txt"), "w") as fh:
        fh.write(f"scenario: {cfg.name}\n")
        for name in sorted(report.verdicts):
            v = report.verdicts[name]
            status = "PASS" if v.passed else "FAIL"
            fh.write(f"{status}  {name}  worst_ratio={v.worst_ratio:.6g} "
                     f"at t={v.t_worst:.6g}\n")
        n_viol = len(report.violations)
        fh.write(f"in-loop violations: {n_viol}\n")
    with open(os.path.join(outdir, "plot.gp"), "w") as fh:
        fh.write("# gnuplot script for the emitted time series\n"
                 "set datafile separator ','\n"
                 "set logscale y\n"
                 "set xlabel 'time (day)'\n"
                 "set ylabel 'sup norm'\n"
                 "plot 'series.csv' using 1:2 with lines title 'T', \\\n"
                 "     'series.csv' using 1:4 with lines title 'N', \\\n"
                 "     'series.csv' using 1:5 with lines title 'Phi'\n")
