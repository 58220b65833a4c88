"""Scenario configuration: flat ``key = value`` files with [section] headers.

Parsing is strict and reports every violation at once, each with the line it
came from.  Unknown sections and keys are errors; missing required keys are
listed together, so an empty file names everything it needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .analysis import reaction_dt_cap
from .errors import ConfigError
from .grid import Grid
from .kinetics import Params

__all__ = ["Bump", "ScenarioConfig", "parse_config", "load_scenario",
           "bundled_scenarios", "BUMP_PRESETS", "KNOWN_CHECKS"]

BUMP_PRESETS = {
    "one": ((0.0, 0.0),),
    "two": ((-1.0, 0.0), (1.0, 0.0)),
    "three": ((-1.0, -1.0), (1.0, -1.0), (0.0, 1.0)),
    "none": (),
}

KNOWN_CHECKS = (
    "apriori_box",
    "necrosis_monotone",
    "envelope_destruction_dominant",
    "envelope_eigenvalue_gated",
    "envelope_near_capacity",
    "phi_vanishing",
    "necrosis_settled",
)

_PARAM_KEYS = ("rho", "alpha", "beta1", "beta2", "gamma", "delta", "K")

_SCHEMA = {
    "params": {k: float for k in _PARAM_KEYS} | {"kappa0": float},
    "grid": {"nx": int, "ny": int, "x0": float, "x1": float, "y0": float, "y1": float},
    "initial": {"tumor_bumps": str, "bump_amplitude": float, "bump_sigma": float,
                "bump_centers": str, "tumor": float, "necrosis": float,
                "vasculature": float},
    "run": {"t_end": float, "dt": float, "solver": str, "n_cap": float,
            "box_tol": float, "monotone_tol": float},
    "output": {"dir": str, "series_every": float, "snapshot_every": float,
               "cells": str},
    "checks": {"names": str, "slack": float, "phi_threshold": float,
               "phi_horizon": float, "eps": float, "warmup": float},
}

_REQUIRED = {
    "params": _PARAM_KEYS,
    "grid": ("nx", "ny"),
    "initial": ("tumor_bumps", "necrosis", "vasculature"),
    "run": ("t_end", "dt"),
}

_DEFAULTS = {
    ("params", "kappa0"): 1.0,
    ("grid", "x0"): -2.0,
    ("grid", "x1"): 2.0,
    ("grid", "y0"): -2.0,
    ("grid", "y1"): 2.0,
    ("initial", "bump_amplitude"): 0.8,
    ("initial", "bump_sigma"): 0.3,
    ("initial", "bump_centers"): "",
    ("initial", "tumor"): 0.0,
    ("run", "solver"): "dct",
    ("run", "n_cap"): 5.0,
    ("run", "box_tol"): 1e-8,
    ("run", "monotone_tol"): 1e-10,
    ("output", "dir"): "out",
    ("output", "series_every"): 1.0,
    ("output", "snapshot_every"): 0.0,
    ("output", "cells"): "",
    ("checks", "names"): "apriori_box, necrosis_monotone",
    ("checks", "slack"): 1e-3,
    ("checks", "phi_threshold"): 1e-2,
    ("checks", "phi_horizon"): 0.0,   # 0 = end of run
    ("checks", "eps"): 0.0,
    ("checks", "warmup"): 0.0,
}


@dataclass(frozen=True)
class Bump:
    """One Gaussian tumor seed: amplitude * exp(-|x - c|^2 / (2 sigma^2))."""
    amplitude: float
    cx: float
    cy: float
    sigma: float


@dataclass
class ScenarioConfig:
    name: str
    params: Params
    grid: Grid
    bumps: tuple[Bump, ...]
    tumor0: float          # uniform tumor level added under the bumps
    necrosis0: float       # uniform initial necrosis
    vasculature0: float    # uniform initial vasculature
    t_end: float
    dt: float
    solver: str = "dct"
    n_cap: float = 5.0
    box_tol: float = 1e-8
    monotone_tol: float = 1e-10
    output_dir: str = "out"
    series_every: float = 1.0
    snapshot_every: float = 0.0
    cells: tuple[tuple[int, int], ...] = ()
    checks: tuple[str, ...] = ("apriori_box", "necrosis_monotone")
    slack: float = 1e-3
    phi_threshold: float = 1e-2
    phi_horizon: float = 0.0
    eps: float = 0.0
    warmup: float = 0.0

    @property
    def dt_cap(self) -> float:
        return reaction_dt_cap(self.params, self.t_end, self.n_cap)


def _parse_lines(text: str, violations: list[str]):
    """Raw pass: (section, key) -> (string value, line number)."""
    entries: dict[tuple[str, str], tuple[str, int]] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                violations.append(f"line {lineno}: unknown section [{section}]")
                section = None
            continue
        if "=" not in line:
            violations.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if section is None:
            violations.append(f"line {lineno}: key {key!r} outside any known section")
            continue
        if key not in _SCHEMA[section]:
            violations.append(f"line {lineno}: unknown key {key!r} in [{section}]")
            continue
        if (section, key) in entries:
            violations.append(f"line {lineno}: duplicate key {key!r} in [{section}]")
            continue
        entries[(section, key)] = (value, lineno)
    return entries


def _convert(entries, violations):
    values: dict[tuple[str, str], object] = dict(_DEFAULTS)
    for (section, key), (text, lineno) in entries.items():
        typ = _SCHEMA[section][key]
        try:
            values[(section, key)] = typ(text)
        except ValueError:
            violations.append(
                f"line {lineno}: value {text!r} for {section}.{key} is not {typ.__name__}")
    for section, keys in _REQUIRED.items():
        for key in keys:
            if (section, key) not in values:
                violations.append(f"missing required key {section}.{key}")
    return values


def _parse_pairs(text: str, label: str, violations: list[str]):
    """Parse 'a,b; c,d' into float pairs."""
    pairs = []
    if not text.strip():
        return pairs
    for chunk in text.split(";"):
        parts = chunk.split(",")
        try:
            if len(parts) != 2:
                raise ValueError
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError:
            violations.append(f"{label}: expected 'a,b; c,d' pairs, got {chunk.strip()!r}")
    return pairs


def parse_config(text: str, name: str = "scenario") -> ScenarioConfig:
    """Parse and validate; raises :class:`ConfigError` with every violation."""
    violations: list[str] = []
    entries = _parse_lines(text, violations)
    values = _convert(entries, violations)
    if violations:
        raise ConfigError(violations)

    def get(section, key):
        return values[(section, key)]

    params = None
    try:
        params = Params(**{k: get("params", k) for k in _PARAM_KEYS},
                        kappa0=get("params", "kappa0"))
    except ValueError as exc:
        violations.append(f"params: {exc}")

    grid = None
    try:
        grid = Grid(get("grid", "nx"), get("grid", "ny"),
                    (get("grid", "x0"), get("grid", "x1"),
                     get("grid", "y0"), get("grid", "y1")))
    except ValueError as exc:
        violations.append(f"grid: {exc}")

    K_raw = get("params", "K")  # box checks work even if Params() was rejected
    K = K_raw if K_raw > 0.0 else float("inf")
    preset = get("initial", "tumor_bumps")
    amplitude = get("initial", "bump_amplitude")
    sigma = get("initial", "bump_sigma")
    centers: tuple = ()
    if preset == "custom":
        centers = tuple(_parse_pairs(get("initial", "bump_centers"),
                                     "initial.bump_centers", violations))
        if not centers:
            violations.append("initial.bump_centers required when tumor_bumps = custom")
    elif preset in BUMP_PRESETS:
        centers = BUMP_PRESETS[preset]
    else:
        violations.append(
            f"initial.tumor_bumps must be one of {sorted(BUMP_PRESETS)} or 'custom', "
            f"got {preset!r}")
    if sigma <= 0.0:
        violations.append(f"initial.bump_sigma must be positive, got {sigma}")
    for label in ("bump_amplitude", "tumor", "necrosis", "vasculature"):
        v = get("initial", label)
        if not 0.0 <= v <= K:
            violations.append(
                f"initial.{label} = {v} violates the admissible box [0, K], K = {K}")

    t_end = get("run", "t_end")
    dt = get("run", "dt")
    solver = get("run", "solver")
    n_cap = get("run", "n_cap")
    if dt <= 0.0:
        violations.append(f"run.dt must be positive, got {dt}")
    if t_end < dt:
        violations.append(f"run.t_end = {t_end} shorter than one step dt = {dt}")
    if solver not in ("dct", "cg"):
        violations.append(f"run.solver must be 'dct' or 'cg', got {solver!r}")
    if params is not None and dt > 0.0:
        cap = reaction_dt_cap(params, t_end, n_cap)
        if dt > cap:
            violations.append(
                f"run.dt = {dt} exceeds the explicit-reaction cap {cap:.6g} "
                f"for this horizon (n_cap = {n_cap})")

    cell_pairs = _parse_pairs(get("output", "cells"), "output.cells", violations)
    cells = []
    for cx, cy in cell_pairs:
        i, j = int(cx), int(cy)
        if grid is not None and not (0 <= i < grid.nx and 0 <= j < grid.ny):
            violations.append(f"output.cells: ({i}, {j}) outside the {grid.nx}x{grid.ny} grid")
        else:
            cells.append((i, j))

    names = tuple(s.strip() for s in get("checks", "names").split(",") if s.strip())
    for check in names:
        if check not in KNOWN_CHECKS:
            violations.append(f"checks.names: unknown check {check!r} "
                              f"(known: {', '.join(KNOWN_CHECKS)})")
    eps = get("checks", "eps")
    if "envelope_near_capacity" in names:
        if not 0.0 < eps < K:
            violations.append(
                f"checks.eps = {eps} must lie in (0, K) for envelope_near_capacity")
        elif params is not None and get("initial", "necrosis") < K - eps:
            violations.append(
                f"initial.necrosis = {get('initial', 'necrosis')} below K - eps = {K - eps}")
    for check in ("envelope_destruction_dominant", "envelope_eigenvalue_gated"):
        if check in names and get("initial", "necrosis") <= 0.0:
            violations.append(f"{check} requires positive initial.necrosis")

    if get("output", "series_every") <= 0.0:
        violations.append("output.series_every must be positive")
    if get("output", "snapshot_every") < 0.0:
        violations.append("output.snapshot_every must be >= 0")

    if violations:
        raise ConfigError(violations)

    bumps = tuple(Bump(amplitude, cx, cy, sigma) for cx, cy in centers)
    return ScenarioConfig(
        name=name,
        params=params,
        grid=grid,
        bumps=bumps,
        tumor0=get("initial", "tumor"),
        necrosis0=get("initial", "necrosis"),
        vasculature0=get("initial", "vasculature"),
        t_end=t_end,
        dt=dt,
        solver=solver,
        n_cap=n_cap,
        box_tol=get("run", "box_tol"),
        monotone_tol=get("run", "monotone_tol"),
        output_dir=get("output", "dir"),
        series_every=get("output", "series_every"),
        snapshot_every=get("output", "snapshot_every"),
        cells=tuple(cells),
        checks=names,
        slack=get("checks", "slack"),
        phi_threshold=get("checks", "phi_threshold"),
        phi_horizon=get("checks", "phi_horizon") or t_end,
        eps=eps,
        warmup=get("checks", "warmup"),
    )


def bundled_scenarios() -> list[str]:
    """Names of the scenario files shipped with the package."""
    root = resources.files("gbmsim") / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_scenario(name_or_path: str) -> ScenarioConfig:
    """Load a bundled scenario by name, or parse a config file by path."""
    root = resources.files("gbmsim") / "scenarios"
    bundled = root / f"{name_or_path}.cfg"
    if bundled.is_file():
        return parse_config(bundled.read_text(), name=name_or_path)
    import os
    if os.path.exists(name_or_path):
        with open(name_or_path) as fh:
            stem = os.path.splitext(os.path.basename(name_or_path))[0]
            return parse_config(fh.read(), name=stem)
    raise ConfigError([f"no bundled scenario or config file named {name_or_path!r} "
                       f"(bundled: {', '.join(bundled_scenarios())})"])
