"""First eigenvalue of -Lap + b(x) with zero-flux boundary conditions.

When b is constant the zero-flux ground mode is constant and lambda1 equals
b exactly; in general min(b) <= lambda1 <= max(b).  The eigenvalue gates the
tumor-extinction condition rho < lambda1(-Lap + beta1 * N0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import EigenFailureError, SolverFailureError
from .grid import ScalarField
from .kinetics import Params
from .pde import _cg_arrays

__all__ = ["EigenResult", "RhoConditionResult", "lambda1", "check_rho_condition"]


@dataclass
class EigenResult:
    lambda1: float
    eigenfield: ScalarField  # sup-norm 1, nonnegative (ground-mode positivity)
    iterations: int
    residual: float


@dataclass
class RhoConditionResult:
    satisfied: bool
    margin: float   # lambda1 - rho
    lambda1: float


def lambda1(b: ScalarField, tol: float = 1e-10, max_iter: int = 500) -> EigenResult:
    """Smallest eigenvalue of -Lap_h + diag(b) by shift-inverted power iteration.

    The shift sigma = min(b) - 1 makes the operator SPD with smallest
    eigenvalue >= 1; inner solves use conjugate gradients.  Converged when the
    Rayleigh quotient moves at most tol between iterations and the operator
    residual is at most tol * (1 + |lambda1|).
    """
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if not np.isfinite(b.values).all():
        raise ValueError("potential field contains non-finite values")
    g = b.grid
    sigma = b.min() - 1.0
    shifted = b.values - sigma  # diagonal of (A - sigma I)
    hx, hy = g.hx, g.hy

    def apply_shifted(v):
        return -backend.laplacian(v, hx, hy) + shifted * v

    n = g.nx * g.ny
    inner_tol = min(tol * 1e-2, 1e-12)
    v = np.full((g.nx, g.ny), 1.0 / math.sqrt(n))
    lam = math.inf
    residual = math.inf
    for k in range(1, max_iter + 1):
        w, iters, relres = _cg_arrays(apply_shifted, v, v, inner_tol, 10 * n)
        if relres > inner_tol:
            raise SolverFailureError(
                f"inner CG stalled at relative residual {relres:.3e} in "
                f"eigen iteration {k}", residual=relres, iterations=iters)
        w /= math.sqrt(float(np.vdot(w, w).real))
        aw = apply_shifted(w)
        lam_new = float(np.vdot(w, aw).real) + sigma
        residual = float(np.linalg.norm(aw + (sigma - lam_new) * w))
        if abs(lam_new - lam) <= tol and residual <= tol * (1.0 + abs(lam_new)):
            lam = lam_new
            v = w
            iterations = k
            break
        lam = lam_new
        v = w
    else:
        raise EigenFailureError(
            f"power iteration did not converge in {max_iter} iterations "
            f"(last residual {residual:.3e})",
            residual=residual, iterations=max_iter)

    field = v / np.abs(v).max()
    if field.sum() < 0.0:
        field = -field
    return EigenResult(lambda1=lam, eigenfield=ScalarField(g, field),
                       iterations=iterations, residual=residual)


def check_rho_condition(p: Params, n0: ScalarField, tol: float = 1e-10) -> RhoConditionResult:
    """Evaluate the tumor-extinction gate rho < lambda1(-Lap + beta1 * N0).

    Returns the margin lambda1 - rho; the map beta1 -> lambda1 is
    nondecreasing, so raising beta1 can only widen the margin.
    """
    if n0.min() < 0.0:
        raise ValueError(f"initial necrosis must be nonnegative, min = {n0.min()}")
    result = lambda1(ScalarField(n0.grid, p.beta1 * n0.values), tol=tol)
    margin = result.lambda1 - p.rho
    return RhoConditionResult(satisfied=margin > 0.0, margin=margin,
                              lambda1=result.lambda1)
