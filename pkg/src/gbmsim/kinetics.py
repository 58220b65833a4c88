"""Reaction kinetics for the tumor (T) / necrosis (N) / vasculature (Phi) model.

The raw growth law couples the three densities through the vasculature
volume fraction P = Phi/(Phi+T), which is undefined where both densities
vanish.  Every function here therefore evaluates the P-dependent products
through the regularized combinations

    B(Phi, T) = T+ * sqrt(1 - P^2)      (hypoxic mass flux)
    D(Phi, T) = T+ * P                  (vascularized tumor density)

which extend continuously (and globally Lipschitz) to the whole plane with
B = D = 0 on the closed negative quadrant.  Negative inputs pass through
positive parts, so small solver undershoots self-heal instead of raising.

All functions accept floats or numpy arrays elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Params",
    "StateTriple",
    "vascular_fraction",
    "b_func",
    "d_func",
    "f1",
    "f2",
    "f3",
    "rates",
    "f_truncated",
    "rates_truncated",
    "sum_rhs",
]


@dataclass(frozen=True)
class Params:
    """Reaction coefficients plus the tumor diffusion constant.

    rho    : tumor proliferation rate (1/day)
    alpha  : hypoxic death rate (cell/day)
    beta1  : tumor -> necrosis conversion rate (1/day)
    beta2  : vasculature -> necrosis conversion rate (1/day)
    gamma  : vasculature proliferation rate (1/day)
    delta  : vasculature destruction rate by tumor (1/day)
    K      : carrying capacity (cell/cm^3)
    kappa0 : tumor diffusion coefficient (cm^2/day)
    """

    rho: float
    alpha: float
    beta1: float
    beta2: float
    gamma: float
    delta: float
    K: float
    kappa0: float = 1.0

    def __post_init__(self):
        for name in ("rho", "alpha", "beta1", "beta2", "gamma", "delta", "K", "kappa0"):
            value = getattr(self, name)
            if not (value > 0.0 and np.isfinite(value)):
                raise ValueError(f"parameter {name} must be strictly positive, got {value!r}")

    @classmethod
    def delta_dominant(cls, **overrides) -> "Params":
        """Reference coefficient set in which vasculature destruction by the
        tumor dominates vasculature growth (delta >= gamma/K)."""
        values = dict(rho=1.0, alpha=0.03, beta1=0.03, beta2=0.03,
                      gamma=0.003, delta=0.3, K=1.0, kappa0=1.0)
        values.update(overrides)
        return cls(**values)

    @classmethod
    def gamma_dominant(cls, **overrides) -> "Params":
        """Reference coefficient set with the gamma/delta roles swapped, so
        vasculature growth dominates its destruction (delta < gamma/K)."""
        values = dict(rho=1.0, alpha=0.03, beta1=0.03, beta2=0.03,
                      gamma=0.3, delta=0.03, K=1.0, kappa0=1.0)
        values.update(overrides)
        return cls(**values)

    def as_tuple(self):
        return (self.rho, self.alpha, self.beta1, self.beta2,
                self.gamma, self.delta, self.K)


@dataclass(frozen=True)
class StateTriple:
    """Pointwise (T, N, Phi) density triple (cell/cm^3).

    Raw values may leave the physical box transiently during numerics;
    monitored invariants live in :mod:`gbmsim.analysis`.
    """

    T: float
    N: float
    Phi: float

    @property
    def total(self) -> float:
        """Combined density T + N + Phi."""
        return self.T + self.N + self.Phi

    def as_array(self) -> np.ndarray:
        return np.array([self.T, self.N, self.Phi], dtype=float)

    @classmethod
    def from_array(cls, a) -> "StateTriple":
        return cls(float(a[0]), float(a[1]), float(a[2]))


def _pos(x):
    return np.maximum(x, 0.0)


def vascular_fraction(phi, t):
    """Vasculature volume fraction Phi+/(Phi+ + T+), in [0, 1].

    Where both positive parts vanish the fraction is taken to be 0; that is
    the limit along the tumor axis and keeps the vasculature growth term
    null in the absence of tumor.
    """
    phi_p = _pos(phi)
    t_p = _pos(t)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        denom = phi_p + t_p
        frac = np.where(denom > 0.0, phi_p / np.where(denom > 0.0, denom, 1.0), 0.0)
    return frac if isinstance(frac, np.ndarray) and frac.ndim else float(frac)


def b_func(phi, t):
    """Regularized hypoxia factor B = T+ * sqrt(1 - P^2); 0 at the origin."""
    p = vascular_fraction(phi, t)
    radicand = np.clip(1.0 - np.asarray(p) ** 2, 0.0, 1.0)
    out = _pos(t) * np.sqrt(radicand)
    return out if isinstance(out, np.ndarray) and out.ndim else float(out)


def d_func(phi, t):
    """Regularized vascularized-tumor density D = T+ * P; 0 at the origin."""
    out = _pos(t) * vascular_fraction(phi, t)
    return out if isinstance(out, np.ndarray) and out.ndim else float(out)


def _rates_raw(T, N, Phi, p: Params):
    """All three reaction rates at raw (possibly negative) densities."""
    frac = np.asarray(vascular_fraction(Phi, T))
    t_pos = _pos(T)
    B = t_pos * np.sqrt(np.clip(1.0 - frac**2, 0.0, 1.0))
    D = t_pos * frac
    logistic = 1.0 - (T + N + Phi) / p.K
    r1 = p.rho * D * logistic - p.alpha * B - p.beta1 * N * T
    r2 = p.alpha * B + p.beta1 * N * T + p.delta * T * Phi + p.beta2 * N * Phi
    r3 = (p.gamma / p.K) * B * Phi * logistic - p.delta * T * Phi - p.beta2 * N * Phi
    return r1, r2, r3


def rates(T, N, Phi, p: Params):
    """(f1, f2, f3) elementwise on floats or arrays."""
    return _rates_raw(T, N, Phi, p)


def f1(s: StateTriple, p: Params) -> float:
    """Tumor rate: vascularized logistic growth minus hypoxic death and
    necrotic destruction."""
    return float(_rates_raw(s.T, s.N, s.Phi, p)[0])


def f2(s: StateTriple, p: Params) -> float:
    """Necrosis rate: gains every loss term of tumor and vasculature;
    nonnegative on nonnegative states."""
    return float(_rates_raw(s.T, s.N, s.Phi, p)[1])


def f3(s: StateTriple, p: Params) -> float:
    """Vasculature rate: tumor-driven logistic growth minus destruction."""
    return float(_rates_raw(s.T, s.N, s.Phi, p)[2])


def rates_truncated(T, N, Phi, p: Params):
    """(f1, f2, f3) of the truncated system, elementwise.

    f1 sees (T+, N+, Phi+); f2 and f3 see T clamped to [0, K] as well, which
    is what makes the pointwise a-priori box hold by construction.  On states
    already inside the box this coincides with the raw rates.
    """
    t_p = _pos(T)
    n_p = _pos(N)
    phi_p = _pos(Phi)
    t_k = np.minimum(t_p, p.K)
    r1 = _rates_raw(t_p, n_p, phi_p, p)[0]
    _, r2, r3 = _rates_raw(t_k, n_p, phi_p, p)
    return r1, r2, r3


def f_truncated(i: int, s: StateTriple, p: Params) -> float:
    """Rate i of the truncated system at a single state; i in {1, 2, 3}."""
    if i not in (1, 2, 3):
        raise ValueError(f"rate index must be 1, 2 or 3, got {i}")
    return float(rates_truncated(s.T, s.N, s.Phi, p)[i - 1])


def sum_rhs(s: StateTriple, p: Params) -> float:
    """Rate of the combined density S = T + N + Phi.

    Every exchange term cancels in f1 + f2 + f3, leaving only the two
    logistic sources; the value is 0 whenever T = 0 or (for the vascular
    part) Phi = 0, and vanishes identically on S = K.
    """
    D = d_func(s.Phi, s.T)
    B = b_func(s.Phi, s.T)
    logistic = 1.0 - s.total / p.K
    return float((p.rho * D + (p.gamma / p.K) * B * s.Phi) * logistic)
