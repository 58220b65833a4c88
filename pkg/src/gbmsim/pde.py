"""Semi-implicit solver for the diffusion-coupled system on a uniform grid.

One step advances the tumor field by backward-Euler diffusion with the
reaction frozen explicitly,

    (I - dt*kappa0*Lap_h) T{n+1} = T{n} + dt * f1(T{n}, N{n}, Phi{n}),

while necrosis and vasculature advance by explicit Euler on their reaction
rates.  The reaction is always evaluated in truncated form (positive parts,
tumor clamped to [0, K]), which preserves the pointwise box without clipping
the state itself.  The Laplacian uses the 5-point stencil with mirror ghost
cells, so constants are in its kernel and the discrete integral of Lap_h(f)
vanishes identically (zero-flux mass accounting).

Two interchangeable solvers handle the implicit system: a cosine-transform
direct solve (the mirror closure is diagonal in the DCT-II basis, so this is
exact to rounding and O(n log n); the default) and warm-started conjugate
gradients.  Both are deterministic for fixed inputs.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.fft

from . import backend
from .analysis import RunReport, Violation
from .errors import IntegrationFailureError, InvalidInitialDataError, SolverFailureError
from .grid import Grid, GridState, ScalarField, write_snapshot
from .kinetics import Params

__all__ = [
    "laplacian_neumann",
    "HelmholtzOperator",
    "cg_solve",
    "SpectralHelmholtzSolver",
    "CgHelmholtzSolver",
    "imex_step",
    "run_simulation",
    "SnapshotObserver",
    "SERIES_COLUMNS",
    "write_series_csv",
]

SERIES_COLUMNS = ("t", "Tmax", "Tmin", "Nmax", "Phimax", "massT", "massN", "massPhi")


def laplacian_neumann(f: ScalarField) -> ScalarField:
    """5-point Laplacian with mirror (zero-flux) boundary closure."""
    g = f.grid
    return ScalarField(g, backend.laplacian(f.values, g.hx, g.hy))


class HelmholtzOperator:
    """The SPD operator (I - c * Lap_h) on a grid, for c > 0."""

    def __init__(self, grid: Grid, c: float):
        if c <= 0.0:
            raise ValueError(f"Helmholtz shift must be positive, got {c}")
        self.grid = grid
        self.c = c

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return backend.helmholtz_apply(v, self.grid.hx, self.grid.hy, self.c)


def _cg_arrays(apply_op, b, x0, tol, maxiter):
    """Plain conjugate gradients over ndarray callables; deterministic."""
    x = x0.copy()
    bnorm = math.sqrt(float(np.vdot(b, b).real))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    r = b - apply_op(x)
    p = r.copy()
    rs = float(np.vdot(r, r).real)
    iters = 0
    while iters < maxiter and math.sqrt(rs) > tol * bnorm:
        Ap = apply_op(p)
        alpha = rs / float(np.vdot(p, Ap).real)
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(np.vdot(r, r).real)
        p *= rs_new / rs
        p += r
        rs = rs_new
        iters += 1
    return x, iters, math.sqrt(rs) / bnorm


def cg_solve(op, rhs: ScalarField, tol: float, x0: ScalarField | None = None,
             maxiter: int | None = None) -> ScalarField:
    """Solve op(x) = rhs by conjugate gradients to a relative residual.

    ``op`` is any symmetric positive definite callable on (nx, ny) arrays,
    e.g. a :class:`HelmholtzOperator`.  Raises :class:`SolverFailureError`
    when the iteration cap (default 10 * nx * ny) is hit first.
    """
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    g = rhs.grid
    if maxiter is None:
        maxiter = 10 * g.nx * g.ny
    start = rhs.values * 0.0 if x0 is None else x0.values
    if isinstance(op, HelmholtzOperator):
        x, iters, relres = backend.helmholtz_cg(
            rhs.values, start, g.hx, g.hy, op.c, tol, maxiter)
    else:
        x, iters, relres = _cg_arrays(op, rhs.values, start, tol, maxiter)
    if relres > tol:
        raise SolverFailureError(
            f"CG stalled at relative residual {relres:.3e} after {iters} iterations",
            residual=relres, iterations=iters)
    return ScalarField(g, x)


class SpectralHelmholtzSolver:
    """Direct solve of (I - c*Lap_h) by 2-D cosine transform.

    The mirror-closure stencil is exactly diagonalized by the DCT-II basis
    on cell centers, with 1-D eigenvalues (2 - 2 cos(pi k / n)) / h^2.
    """

    def __init__(self, grid: Grid, c: float):
        if c <= 0.0:
            raise ValueError(f"Helmholtz shift must be positive, got {c}")
        self.grid = grid
        self.c = c
        kx = np.arange(grid.nx)
        ky = np.arange(grid.ny)
        lam_x = (2.0 - 2.0 * np.cos(np.pi * kx / grid.nx)) / grid.hx**2
        lam_y = (2.0 - 2.0 * np.cos(np.pi * ky / grid.ny)) / grid.hy**2
        self._denom = 1.0 + c * (lam_x[:, None] + lam_y[None, :])

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        coeff = scipy.fft.dctn(rhs, type=2, norm="ortho")
        coeff /= self._denom
        return scipy.fft.idctn(coeff, type=2, norm="ortho")


class CgHelmholtzSolver:
    """Warm-started CG solve of the same system, for cross-checking the
    spectral path and for grids where a transform is unavailable."""

    def __init__(self, grid: Grid, c: float, tol: float = 1e-10,
                 maxiter: int | None = None):
        self.op = HelmholtzOperator(grid, c)
        self.tol = tol
        self.maxiter = 10 * grid.nx * grid.ny if maxiter is None else maxiter
        self._last = None

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        g = self.op.grid
        start = rhs if self._last is None else self._last
        x, iters, relres = backend.helmholtz_cg(
            rhs, start, g.hx, g.hy, self.op.c, self.tol, self.maxiter)
        if relres > self.tol:
            raise SolverFailureError(
                f"CG stalled at relative residual {relres:.3e} after {iters} iterations",
                residual=relres, iterations=iters)
        self._last = x
        return x


@lru_cache(maxsize=8)
def _spectral_solver(grid: Grid, c: float) -> SpectralHelmholtzSolver:
    return SpectralHelmholtzSolver(grid, c)


def imex_step(state: GridState, dt: float, p: Params, solver=None) -> GridState:
    """One semi-implicit step: implicit diffusion on T, explicit truncated
    reaction on all three fields.

    ``solver`` is a solver object whose ``solve`` matches the step's
    (I - dt*kappa0*Lap_h); by default a cached spectral solver is used.
    Raises on solver failure or a non-finite result.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    g = state.grid
    if solver is None:
        solver = _spectral_solver(g, dt * p.kappa0)
    r1, r2, r3 = backend.reaction_rates(
        state.T.values, state.N.values, state.Phi.values,
        *p.as_tuple(), True)
    t_new = solver.solve(state.T.values + dt * r1)
    n_new = state.N.values + dt * r2
    phi_new = state.Phi.values + dt * r3
    if not (np.isfinite(t_new).all() and np.isfinite(n_new).all()
            and np.isfinite(phi_new).all()):
        raise IntegrationFailureError(
            f"non-finite state after step to t = {state.t + dt}", t=state.t + dt)
    return GridState(state.t + dt, ScalarField(g, t_new),
                     ScalarField(g, n_new), ScalarField(g, phi_new))


def _series_row(state: GridState) -> tuple[float, ...]:
    return (state.t,
            state.T.max(), state.T.min(), state.N.max(), state.Phi.max(),
            state.T.integral(), state.N.integral(), state.Phi.integral())


class SnapshotObserver:
    """Writes one snapshot file per field at its cadence.

    Files are named ``{var}_t{time:012.4f}.dat`` in ``outdir``, in the
    standard snapshot format.
    """

    def __init__(self, outdir, every: float, variables=("T", "N", "Phi")):
        self.outdir = outdir
        self.every = every
        self.variables = variables

    def sample(self, state: GridState) -> None:
        import os
        os.makedirs(self.outdir, exist_ok=True)
        for var in self.variables:
            f: ScalarField = getattr(state, var)
            path = os.path.join(self.outdir, f"{var}_t{state.t:012.4f}.dat")
            write_snapshot(path, f, state.t)


def run_simulation(initial: GridState, t_end: float, dt: float, p: Params,
                   observers=(), monitors=(), cells=(),
                   series_every: float = 1.0, linear_solver: str = "dct",
                   cg_tol: float = 1e-10,
                   enforce_initial_box: bool = True) -> RunReport:
    """Advance the system to t_end, recording norms and invariant violations.

    ``monitors`` run every step on (previous, new) states; ``observers`` are
    sampled at their own cadence (attribute ``every``, in days) plus the
    initial and final states; ``cells`` are (i, j) indices whose (T, N, Phi)
    traces are recorded on the series cadence.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end < dt:
        raise ValueError(f"t_end = {t_end} shorter than one step dt = {dt}")
    if enforce_initial_box:
        for label, f in (("T", initial.T), ("N", initial.N), ("Phi", initial.Phi)):
            if f.min() < 0.0 or f.max() > p.K:
                raise InvalidInitialDataError(
                    f"initial {label} outside [0, K]: range "
                    f"[{f.min():.6g}, {f.max():.6g}], K = {p.K}")

    g = initial.grid
    span = t_end - initial.t
    n_steps = max(1, round(span / dt))
    # land exactly on t_end: a shortened trailing step absorbs any remainder
    trailing = span - n_steps * dt
    if trailing > 1e-12 * dt:
        n_steps += 1

    if linear_solver == "dct":
        solver = SpectralHelmholtzSolver(g, dt * p.kappa0)
    elif linear_solver == "cg":
        solver = CgHelmholtzSolver(g, dt * p.kappa0, tol=cg_tol)
    else:
        raise ValueError(f"unknown linear solver {linear_solver!r}")

    stride = max(1, round(series_every / dt))
    obs_strides = [max(1, round(ob.every / dt)) for ob in observers]

    rows = [_series_row(initial)]
    cell_rows = {c: [(initial.T.values[c], initial.N.values[c], initial.Phi.values[c])]
                 for c in cells}
    violations: list[Violation] = []
    for ob in observers:
        ob.sample(initial)

    state = initial
    for step in range(1, n_steps + 1):
        t_next = initial.t + step * dt
        step_dt = dt
        if step == n_steps:
            step_dt = t_end - state.t
            t_next = t_end
        step_solver = solver
        if abs(step_dt - dt) > 1e-12 * dt:
            step_solver = (SpectralHelmholtzSolver(g, step_dt * p.kappa0)
                           if linear_solver == "dct"
                           else CgHelmholtzSolver(g, step_dt * p.kappa0, tol=cg_tol))
        try:
            new_state = imex_step(state, step_dt, p, solver=step_solver)
        except (SolverFailureError, IntegrationFailureError) as exc:
            exc.args = (f"at t = {t_next}: {exc.args[0]}",)
            raise
        new_state.t = t_next

        for mon in monitors:
            violations.extend(mon(state, new_state))
        if step % stride == 0 or step == n_steps:
            rows.append(_series_row(new_state))
            for c in cells:
                cell_rows[c].append((new_state.T.values[c], new_state.N.values[c],
                                     new_state.Phi.values[c]))
        for ob, ob_stride in zip(observers, obs_strides):
            if step % ob_stride == 0 or step == n_steps:
                ob.sample(new_state)
        state = new_state
        if step % 32 == 0:
            # decayed fields otherwise settle into subnormals, where FFTs and
            # kinetics pay microcode-assist penalties for the whole tail
            for arr in (state.T.values, state.N.values, state.Phi.values):
                np.copyto(arr, 0.0, where=np.abs(arr) < 1e-300)

    data = np.asarray(rows, dtype=np.float64)
    series = {name: data[:, k].copy() for k, name in enumerate(SERIES_COLUMNS)}
    cell_series = {}
    for c, recorded in cell_rows.items():
        arr = np.asarray(recorded, dtype=np.float64)
        cell_series[c] = {"T": arr[:, 0], "N": arr[:, 1], "Phi": arr[:, 2]}
    return RunReport(series=series, violations=violations, cell_series=cell_series)


def write_series_csv(path, report: RunReport) -> None:
    """Time-series CSV with the fixed column set, floats in shortest
    round-trip form (byte-identical across reruns of the same config)."""
    with open(path, "w") as fh:
        fh.write(",".join(SERIES_COLUMNS) + "\n")
        n = report.series["t"].shape[0]
        for k in range(n):
            fh.write(",".join(repr(float(report.series[c][k]))
                              for c in SERIES_COLUMNS) + "\n")
