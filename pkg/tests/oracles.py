"""Independent reference implementations the tests check against.

Everything here is deliberately written from the raw formulas (literal
transcriptions, dense matrix assembly, step-doubled integration) and never
calls the code paths it is used to verify.
"""

import math

import numpy as np


def literal_rates(T, N, Phi, p):
    """Raw growth law, transcribed term by term with the volume fraction
    P = Phi+/(Phi+ + T+).  Only defined where (Phi+, T+) != (0, 0)."""
    tp = max(T, 0.0)
    pp = max(Phi, 0.0)
    P = pp / (pp + tp)
    rad = math.sqrt(1.0 - P * P)
    logistic = 1.0 - (T + N + Phi) / p.K
    r1 = p.rho * P * T * logistic - p.alpha * T * rad - p.beta1 * N * T
    r2 = p.alpha * T * rad + p.beta1 * N * T + p.delta * T * Phi + p.beta2 * N * Phi
    r3 = (p.gamma / p.K) * T * rad * Phi * logistic - p.delta * T * Phi - p.beta2 * N * Phi
    return r1, r2, r3


def literal_truncated_rates(T, N, Phi, p):
    """Truncated system: rate 1 at positive parts, rates 2-3 with the tumor
    clamped to [0, K] as well."""
    tp = max(T, 0.0)
    n = max(N, 0.0)
    pp = max(Phi, 0.0)
    tk = min(tp, p.K)

    def guarded(Tv):
        if Tv == 0.0 and pp == 0.0:
            return (0.0, 0.0, 0.0)
        return literal_rates(Tv, n, pp, p)

    r1 = guarded(tp)[0]
    _, r2, r3 = guarded(tk)
    return r1, r2, r3


def rk4_reference_step(state, dt, p, tol=1e-10, max_halvings=14):
    """Step-doubling reference: refine the substep until two successive
    refinements agree to ``tol`` in the sup norm; truncated kinetics."""

    def rk4_substeps(y, m):
        h = dt / m
        T, N, Phi = y
        for _ in range(m):
            k1 = literal_truncated_rates(T, N, Phi, p)
            k2 = literal_truncated_rates(T + 0.5 * h * k1[0], N + 0.5 * h * k1[1],
                                         Phi + 0.5 * h * k1[2], p)
            k3 = literal_truncated_rates(T + 0.5 * h * k2[0], N + 0.5 * h * k2[1],
                                         Phi + 0.5 * h * k2[2], p)
            k4 = literal_truncated_rates(T + h * k3[0], N + h * k3[1],
                                         Phi + h * k3[2], p)
            T += (h / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            N += (h / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            Phi += (h / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        return (T, N, Phi)

    m = 1
    prev = rk4_substeps(state, m)
    for _ in range(max_halvings):
        m *= 2
        cur = rk4_substeps(state, m)
        if max(abs(a - b) for a, b in zip(cur, prev)) <= tol:
            return cur
        prev = cur
    raise AssertionError("reference integrator did not settle")


def dense_neumann_laplacian(grid):
    """Dense matrix of the mirror-closure 5-point Laplacian, row-major cell
    ordering (i * ny + j)."""
    nx, ny = grid.nx, grid.ny
    n = nx * ny
    A = np.zeros((n, n))
    ihx2 = 1.0 / grid.hx**2
    ihy2 = 1.0 / grid.hy**2
    for i in range(nx):
        for j in range(ny):
            k = i * ny + j
            for ii, jj, w in ((i - 1, j, ihx2), (i + 1, j, ihx2),
                              (i, j - 1, ihy2), (i, j + 1, ihy2)):
                if 0 <= ii < nx and 0 <= jj < ny:
                    A[k, k] -= w
                    A[k, ii * ny + jj] += w
    return A


def dense_helmholtz(grid, c):
    """Dense (I - c * Laplacian)."""
    return np.eye(grid.nx * grid.ny) - c * dense_neumann_laplacian(grid)


def dense_schroedinger(grid, b_values):
    """Dense (-Laplacian + diag(b))."""
    return -dense_neumann_laplacian(grid) + np.diag(b_values.ravel())
