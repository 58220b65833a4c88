"""Pointwise (diffusion-free) dynamics: integration, equilibria, long-time limits.

The system has a continuum of rest states: total extinction, necrosis-only
states (0, N, 0) with N > 0, and vasculature-only states (0, 0, Phi) with
Phi > 0.  Every trajectory started off the vasculature-only axis converges to
a single necrosis-only point, which :func:`omega_limit_estimate` locates by
direct long-horizon integration.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import IntegrationFailureError, InvalidInitialDataError
from .kinetics import Params, StateTriple, rates

__all__ = [
    "DEFAULT_DT",
    "OdeSolution",
    "EquilibriumTag",
    "EquilibriumClass",
    "OmegaLimitResult",
    "rk4_step",
    "euler_step",
    "integrate",
    "classify_equilibrium",
    "omega_limit_estimate",
]

DEFAULT_DT = 0.01  # day; fixed step keeps ODE/PDE comparisons deterministic

_METHOD_CODES = {"rk4": 0, "euler": 1}


@dataclass
class OdeSolution:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), 3), columns T, N, Phi
    method: str
    dt: float

    def final(self) -> StateTriple:
        return StateTriple.from_array(self.states[-1])

    @property
    def T(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def N(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def Phi(self) -> np.ndarray:
        return self.states[:, 2]


class EquilibriumTag(str, enum.Enum):
    EXTINCT = "extinct"                    # (0, 0, 0)
    NECROSIS_ONLY = "necrosis_only"        # (0, N, 0), N > 0
    VASCULATURE_ONLY = "vasculature_only"  # (0, 0, Phi), Phi > 0
    NOT_EQUILIBRIUM = "not_equilibrium"


@dataclass
class EquilibriumClass:
    tag: EquilibriumTag
    residual: float  # max |f_i| at the state


@dataclass
class OmegaLimitResult:
    state: StateTriple
    converged: bool
    residual: float   # max |f_i| at the final state
    movement: float   # sup-norm travel over the final decade of the horizon


def _step(s: StateTriple, dt: float, p: Params, truncated: bool, method: str) -> StateTriple:
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    _, states, status, fail_step = backend.ode_integrate(
        s.as_array(), dt, 1, p.as_tuple(), truncated, _METHOD_CODES[method], 1)
    if status != 0:
        raise IntegrationFailureError(
            f"non-finite state after one {method} step of dt = {dt}",
            t=dt, state=StateTriple.from_array(states[-1]))
    return StateTriple.from_array(states[-1])


def rk4_step(s: StateTriple, dt: float, p: Params, truncated: bool = True) -> StateTriple:
    """One classical 4th-order step (truncated kinetics by default)."""
    return _step(s, dt, p, truncated, "rk4")


def euler_step(s: StateTriple, dt: float, p: Params, truncated: bool = True) -> StateTriple:
    """One explicit Euler step; matches the explicit reaction part of the
    grid solver on spatially uniform data."""
    return _step(s, dt, p, truncated, "euler")


def _require_admissible(s0: StateTriple, p: Params) -> None:
    for name, v in (("T0", s0.T), ("N0", s0.N), ("Phi0", s0.Phi)):
        if not (0.0 <= v <= p.K) or not math.isfinite(v):
            raise InvalidInitialDataError(
                f"{name} = {v!r} outside the admissible box [0, K], K = {p.K}")


def integrate(s0: StateTriple, t_end: float, dt: float, p: Params,
              method: str = "rk4", truncated: bool = True,
              record_every: int = 1) -> OdeSolution:
    """Fixed-step trajectory on [0, t_end] from admissible initial data.

    Records every ``record_every``-th state (plus initial and final).  A
    shortened trailing step lands exactly on t_end when it is not a multiple
    of dt.
    """
    if method not in _METHOD_CODES:
        raise ValueError(f"unknown method {method!r}")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end < dt:
        raise ValueError(f"t_end = {t_end} shorter than one step dt = {dt}")
    _require_admissible(s0, p)

    n_steps = max(1, round(t_end / dt))
    trailing = t_end - n_steps * dt
    if trailing < 1e-12 * dt:
        trailing = 0.0

    idx, states, status, fail_step = backend.ode_integrate(
        s0.as_array(), dt, n_steps, p.as_tuple(), truncated,
        _METHOD_CODES[method], record_every)
    if status != 0:
        raise IntegrationFailureError(
            f"non-finite state at t = {fail_step * dt}",
            t=fail_step * dt, state=StateTriple.from_array(states[-1]))
    times = idx.astype(np.float64) * dt

    if trailing > 0.0:
        _, tail, status, _ = backend.ode_integrate(
            states[-1], trailing, 1, p.as_tuple(), truncated,
            _METHOD_CODES[method], 1)
        if status != 0:
            raise IntegrationFailureError(
                f"non-finite state at t = {t_end}", t=t_end,
                state=StateTriple.from_array(states[-1]))
        states = np.vstack([states, tail[-1:]])
        times = np.append(times, t_end)
    return OdeSolution(times=times, states=states, method=method, dt=dt)


def classify_equilibrium(s: StateTriple, p: Params, tol: float = 1e-9) -> EquilibriumClass:
    """Classify a state against the rest-state continuum at tolerance tol."""
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    residual = float(max(abs(r) for r in rates(s.T, s.N, s.Phi, p)))
    t_small = abs(s.T) <= tol
    n_small = abs(s.N) <= tol
    phi_small = abs(s.Phi) <= tol
    if t_small and n_small and phi_small:
        tag = EquilibriumTag.EXTINCT
    elif t_small and phi_small and s.N > tol:
        tag = EquilibriumTag.NECROSIS_ONLY
    elif t_small and n_small and s.Phi > tol:
        tag = EquilibriumTag.VASCULATURE_ONLY
    else:
        tag = EquilibriumTag.NOT_EQUILIBRIUM
    return EquilibriumClass(tag=tag, residual=residual)


def omega_limit_estimate(s0: StateTriple, p: Params, horizon: float,
                         dt: float = DEFAULT_DT,
                         residual_tol: float = 1e-8,
                         movement_tol: float = 1e-6) -> OmegaLimitResult:
    """Estimate the trajectory's long-time limit by integrating to a horizon.

    The convergence flag requires the reaction residual at the final state to
    be at most ``residual_tol`` and the state to have moved at most
    ``movement_tol`` (sup-norm) over the final tenth of the horizon.  A short
    horizon simply leaves the flag unset.
    """
    _require_admissible(s0, p)
    if s0.total > p.K * (1.0 + 1e-12):
        raise InvalidInitialDataError(
            f"combined density {s0.total!r} exceeds carrying capacity {p.K}")
    n_steps = max(1, round(horizon / dt))
    record_every = max(1, n_steps // 2000)
    sol = integrate(s0, horizon, dt, p, method="rk4", truncated=True,
                    record_every=record_every)
    final = sol.states[-1]
    residual = float(max(abs(r) for r in rates(final[0], final[1], final[2], p)))
    tail = sol.times >= 0.9 * horizon
    movement = float(np.abs(sol.states[tail] - final).max())
    converged = residual <= residual_tol and movement <= movement_tol
    return OmegaLimitResult(state=StateTriple.from_array(final),
                            converged=converged, residual=residual,
                            movement=movement)
