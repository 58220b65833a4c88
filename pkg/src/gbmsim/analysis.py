"""Machine-checkable monitors for the model's provable behavior.

Three parameter regimes admit exponential decay bounds on the tumor and
vasculature sup-norms:

* destruction-dominant vasculature loss: delta >= gamma/K,
* an eigenvalue gate: rho < lambda1(-Lap + beta1*N0) under zero-flux
  boundary conditions,
* initial necrosis near capacity: N0 >= K - eps everywhere.

Each regime yields ``A * exp(-r (t - t0))`` envelopes built here from the
coefficients and the initial data alone; :func:`check_envelope` then compares
a simulated norm series against them.  The module also provides the pointwise
a-priori box monitor, the per-step necrosis monotonicity monitor, and the
time-dependent necrosis ceiling used by both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .grid import GridState, ScalarField
from .kinetics import Params

__all__ = [
    "Violation",
    "CheckVerdict",
    "RunReport",
    "DecayEnvelope",
    "EnvelopePair",
    "necrosis_bound",
    "reaction_dt_cap",
    "apriori_bounds_monitor",
    "BoxMonitor",
    "MonotoneNecrosisMonitor",
    "envelopes_destruction_dominant",
    "envelopes_eigenvalue_gated",
    "envelopes_near_capacity",
    "find_phi_handoff_time",
    "check_envelope",
    "phi_vanishing_check",
    "necrosis_settled_check",
]


class Violation(NamedTuple):
    t: float
    monitor: str
    magnitude: float


@dataclass
class CheckVerdict:
    name: str
    passed: bool
    worst_ratio: float
    t_worst: float


@dataclass
class RunReport:
    """Everything a simulation run produced, ready for verification.

    series maps column name (t, Tmax, Tmin, Nmax, Phimax, massT, massN,
    massPhi) to a 1-D array sampled on the series cadence; cell_series holds
    (T, N, Phi) traces for each monitored cell; violations are in time order.
    """

    series: dict[str, np.ndarray]
    violations: list[Violation] = field(default_factory=list)
    verdicts: dict[str, CheckVerdict] = field(default_factory=dict)
    cell_series: dict[tuple[int, int], dict[str, np.ndarray]] = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.series["t"]


@dataclass(frozen=True)
class DecayEnvelope:
    """The bound amplitude * exp(-rate * (t - t_start))."""

    amplitude: float
    rate: float
    t_start: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0.0:
            raise ValueError(f"envelope amplitude must be >= 0, got {self.amplitude}")

    def value(self, t):
        return self.amplitude * np.exp(-self.rate * (np.asarray(t) - self.t_start))


class EnvelopePair(NamedTuple):
    tumor: DecayEnvelope
    vasculature: DecayEnvelope


def necrosis_bound(p: Params, t_final: float, n0_max: float | None = None) -> float:
    """Worst-case necrosis ceiling at a finite horizon.

    The necrosis rate obeys dN/dt <= C1 + C2*N on the tumor/vasculature box,
    with C1 = alpha*K + delta*K^2 and C2 = (beta1 + beta2)*K, giving the
    exponential-in-horizon ceiling exp(C2*t) * (C1/C2 + N0max).
    """
    if n0_max is None:
        n0_max = p.K
    c1 = p.alpha * p.K + p.delta * p.K * p.K
    c2 = (p.beta1 + p.beta2) * p.K
    if c2 * t_final > 700.0:  # exp overflow; the ceiling is effectively infinite
        return math.inf
    return math.exp(c2 * t_final) * (c1 / c2 + n0_max)


def reaction_dt_cap(p: Params, t_end: float, n_cap: float = 5.0) -> float:
    """Largest explicit-reaction step that keeps the update contractive on
    the invariant box.

    The necrosis level entering the Lipschitz estimate is the horizon ceiling
    of :func:`necrosis_bound` capped at ``n_cap * K``; the ceiling alone grows
    exponentially in the horizon and would shrink the step to nothing on long
    runs, while observed necrosis stays within a few multiples of K (the box
    monitor reports any excursion above the cap regardless).
    """
    c_n = min(necrosis_bound(p, t_end), n_cap * p.K)
    return 0.5 / (p.rho + p.alpha + (p.beta1 + p.beta2 + p.delta) * c_n + 2.0 * p.gamma)


def apriori_bounds_monitor(state: GridState, p: Params, tol: float,
                           n_upper: float) -> list[Violation]:
    """Flag cells outside the pointwise box: T, Phi in [-tol, K+tol] and
    N in [-tol, n_upper+tol].  One violation per breached bound, carrying the
    worst exceedance."""
    out = []

    def _check(values, low, high, label):
        lo = float(values.min())
        hi = float(values.max())
        if lo < low - tol:
            out.append(Violation(state.t, f"apriori_box:{label}<", (low - tol) - lo))
        if hi > high + tol:
            out.append(Violation(state.t, f"apriori_box:{label}>", hi - (high + tol)))

    _check(state.T.values, 0.0, p.K, "T")
    _check(state.N.values, 0.0, n_upper, "N")
    _check(state.Phi.values, 0.0, p.K, "Phi")
    return out


class BoxMonitor:
    """Per-step wrapper around :func:`apriori_bounds_monitor`."""

    name = "apriori_box"

    def __init__(self, p: Params, n_upper: float, tol: float = 1e-8):
        self.p = p
        self.n_upper = n_upper
        self.tol = tol

    def __call__(self, prev: GridState, new: GridState) -> list[Violation]:
        return apriori_bounds_monitor(new, self.p, self.tol, self.n_upper)


class MonotoneNecrosisMonitor:
    """Necrosis never decreases: flags any per-cell, per-step drop > tol."""

    name = "necrosis_monotone"

    def __init__(self, tol: float = 1e-10):
        self.tol = tol

    def __call__(self, prev: GridState, new: GridState) -> list[Violation]:
        drop = float((prev.N.values - new.N.values).max())
        if drop > self.tol:
            return [Violation(new.t, self.name, drop)]
        return []


def envelopes_destruction_dominant(p: Params, n0_min: float, phi0_max: float,
                                   t0_max: float) -> EnvelopePair | None:
    """Decay envelopes for the destruction-dominant regime delta >= gamma/K.

    Requires positive initial necrosis everywhere (n0_min > 0).  Vasculature
    decays at rate beta2*n0_min from its initial sup; the tumor bound uses the
    midpoint rate mu = min(beta1, beta2)*n0_min/2 of the admissible open
    interval and amplitude M = max(t0_max, rho*phi0_max/(beta1*n0_min - mu)).
    Returns None when the regime condition fails (strictly delta < gamma/K).
    """
    if n0_min <= 0.0:
        raise ValueError("initial necrosis minimum must be positive")
    if p.delta < p.gamma / p.K:
        return None
    phi_env = DecayEnvelope(phi0_max, p.beta2 * n0_min)
    mu = 0.5 * min(p.beta1, p.beta2) * n0_min
    M = max(t0_max, p.rho * phi0_max / (p.beta1 * n0_min - mu))
    return EnvelopePair(tumor=DecayEnvelope(M, mu), vasculature=phi_env)


def envelopes_eigenvalue_gated(p: Params, n0: ScalarField, t0_max: float,
                               phi_at_tstar: float, t_star: float,
                               tol: float = 1e-10) -> EnvelopePair | None:
    """Decay envelopes gated by rho < lambda1(-Lap + beta1*N0).

    The tumor decays from t = 0 at rate lambda1 - rho; the vasculature decays
    from the handoff time t_star (see :func:`find_phi_handoff_time`) at the
    midpoint rate beta2 * min(N0) / 2.  Returns None when rho >= lambda1.
    """
    if n0.min() <= 0.0:
        raise ValueError("initial necrosis must be positive everywhere")
    from .spectral import lambda1 as _lambda1

    result = _lambda1(ScalarField(n0.grid, p.beta1 * n0.values), tol=tol)
    if p.rho >= result.lambda1:
        return None
    mu_star = 0.5 * p.beta2 * n0.min()
    return EnvelopePair(
        tumor=DecayEnvelope(t0_max, result.lambda1 - p.rho),
        vasculature=DecayEnvelope(phi_at_tstar, mu_star, t_star),
    )


def envelopes_near_capacity(p: Params, eps: float, t0_max: float,
                            phi0_max: float) -> EnvelopePair | None:
    """Decay envelopes when initial necrosis sits within eps of capacity
    (N0 >= K - eps everywhere).

    Rates are beta1*(K-eps) - rho*eps/K for the tumor and
    beta2*(K-eps) - gamma*eps/K for the vasculature; returns None unless both
    are positive.
    """
    if not 0.0 < eps < p.K:
        raise ValueError(f"eps must lie in (0, K), got {eps}")
    t_rate = p.beta1 * (p.K - eps) - p.rho * eps / p.K
    phi_rate = p.beta2 * (p.K - eps) - p.gamma * eps / p.K
    if t_rate <= 0.0 or phi_rate <= 0.0:
        return None
    return EnvelopePair(
        tumor=DecayEnvelope(t0_max, t_rate),
        vasculature=DecayEnvelope(phi0_max, phi_rate),
    )


def find_phi_handoff_time(times, tmax_series, p: Params, n0_min: float):
    """First sampled time at which the vasculature loss rate is dominated by
    necrosis: (gamma/K) * ||T|| <= beta2 * n0_min / 2.

    Returns (t_star, phi_threshold_index) or None if never reached.
    """
    times = np.asarray(times)
    tmax_series = np.asarray(tmax_series)
    hit = np.nonzero((p.gamma / p.K) * tmax_series <= 0.5 * p.beta2 * n0_min)[0]
    if hit.size == 0:
        return None
    return float(times[hit[0]]), int(hit[0])


def check_envelope(times, values, env: DecayEnvelope, slack: float = 1e-3,
                   name: str = "envelope") -> CheckVerdict:
    """Pass iff value(t) <= envelope(t) * (1 + slack) at every sample with
    t >= t_start; reports the worst value/envelope ratio and where it occurs."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size == 0:
        raise ValueError("empty series")
    mask = times >= env.t_start
    t = times[mask]
    v = values[mask]
    if t.size == 0:
        raise ValueError("no samples at or after the envelope start time")
    bound = env.value(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0.0, v / np.where(bound > 0.0, bound, 1.0),
                         np.where(v > 0.0, np.inf, 0.0))
    worst = int(np.argmax(ratio))
    passed = bool(np.all(v <= bound * (1.0 + slack)))
    return CheckVerdict(name, passed, float(ratio[worst]), float(t[worst]))


def phi_vanishing_check(times, phi_by_cell, threshold: float, horizon: float,
                        final_fraction: float = 0.1,
                        name: str = "phi_vanishing") -> CheckVerdict:
    """Vasculature dies out at every monitored cell.

    Pass iff each cell trace falls below ``threshold`` by the horizon and is
    non-increasing (to rounding) over the final decade of the run.
    """
    times = np.asarray(times, dtype=float)
    passed = True
    worst_ratio = 0.0
    t_worst = float(times[-1])
    tail = times >= times[-1] - final_fraction * (times[-1] - times[0])
    for cell, trace in phi_by_cell.items():
        trace = np.asarray(trace, dtype=float)
        final = float(trace[times <= horizon][-1])
        ratio = final / threshold
        if ratio > worst_ratio:
            worst_ratio = ratio
            t_worst = float(times[times <= horizon][-1])
        if final > threshold:
            passed = False
        increases = np.diff(trace[tail])
        if increases.size and float(increases.max()) > 1e-12:
            passed = False
    return CheckVerdict(name, passed, worst_ratio, t_worst)


def necrosis_settled_check(times, nmax_series, tol: float = 1e-4,
                           final_fraction: float = 0.1,
                           name: str = "necrosis_settled") -> CheckVerdict:
    """Necrosis stays finite and its sup-norm rises at most ``tol`` over the
    final decade of the run."""
    times = np.asarray(times, dtype=float)
    nmax = np.asarray(nmax_series, dtype=float)
    if not np.all(np.isfinite(nmax)):
        return CheckVerdict(name, False, math.inf, float(times[-1]))
    tail = times >= times[-1] - final_fraction * (times[-1] - times[0])
    rise = float(nmax[tail].max() - nmax[tail].min())
    return CheckVerdict(name, rise <= tol, rise / tol, float(times[-1]))
