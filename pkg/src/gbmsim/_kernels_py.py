"""Pure-Python (numpy) implementations of the hot kernels.

Mirrors the API of the compiled extension ``gbmsim._kernels``; the active
implementation is chosen in :mod:`gbmsim.backend`.  Each function operates on
C-contiguous float64 arrays and is deterministic for fixed inputs.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"


def laplacian(f: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """5-point Laplacian with mirror (zero-flux) boundary closure."""
    out = np.empty_like(f)
    out[1:-1, :] = f[:-2, :] - 2.0 * f[1:-1, :] + f[2:, :]
    out[0, :] = f[1, :] - f[0, :]
    out[-1, :] = f[-2, :] - f[-1, :]
    out /= hx * hx

    dy = np.empty_like(f)
    dy[:, 1:-1] = f[:, :-2] - 2.0 * f[:, 1:-1] + f[:, 2:]
    dy[:, 0] = f[:, 1] - f[:, 0]
    dy[:, -1] = f[:, -2] - f[:, -1]
    out += dy / (hy * hy)
    return out


def helmholtz_apply(f: np.ndarray, hx: float, hy: float, c: float) -> np.ndarray:
    """(I - c * Laplacian) f with the mirror Neumann closure."""
    return f - c * laplacian(f, hx, hy)


def helmholtz_cg(b, x0, hx, hy, c, tol, maxiter):
    """Conjugate gradients for (I - c*Lap) x = b.

    Returns (x, iterations, relative_residual); convergence is judged against
    the 2-norm of b.
    """
    x = x0.copy()
    bnorm = math.sqrt(float(np.vdot(b, b).real))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    r = b - helmholtz_apply(x, hx, hy, c)
    p = r.copy()
    rs = float(np.vdot(r, r).real)
    iters = 0
    while iters < maxiter and math.sqrt(rs) > tol * bnorm:
        Ap = helmholtz_apply(p, hx, hy, c)
        alpha = rs / float(np.vdot(p, Ap).real)
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(np.vdot(r, r).real)
        p *= rs_new / rs
        p += r
        rs = rs_new
        iters += 1
    return x, iters, math.sqrt(rs) / bnorm


def reaction_rates(T, N, Phi, rho, alpha, beta1, beta2, gamma, delta, K, truncated):
    """(f1, f2, f3) on arrays; truncated form when ``truncated`` is true."""
    if truncated:
        t1 = np.maximum(T, 0.0)
        n = np.maximum(N, 0.0)
        phi = np.maximum(Phi, 0.0)
        tk = np.minimum(t1, K)
        r1 = _rates(t1, n, phi, rho, alpha, beta1, beta2, gamma, delta, K)[0]
        _, r2, r3 = _rates(tk, n, phi, rho, alpha, beta1, beta2, gamma, delta, K)
        return r1, r2, r3
    return _rates(T, N, Phi, rho, alpha, beta1, beta2, gamma, delta, K)


def _rates(T, N, Phi, rho, alpha, beta1, beta2, gamma, delta, K):
    t_pos = np.maximum(T, 0.0)
    phi_pos = np.maximum(Phi, 0.0)
    denom = phi_pos + t_pos
    frac = np.where(denom > 0.0, phi_pos / np.where(denom > 0.0, denom, 1.0), 0.0)
    B = t_pos * np.sqrt(np.clip(1.0 - frac * frac, 0.0, 1.0))
    D = t_pos * frac
    logistic = 1.0 - (T + N + Phi) / K
    r1 = rho * D * logistic - alpha * B - beta1 * N * T
    r2 = alpha * B + beta1 * N * T + delta * T * Phi + beta2 * N * Phi
    r3 = (gamma / K) * B * Phi * logistic - delta * T * Phi - beta2 * N * Phi
    return r1, r2, r3


def _rates_scalar(T, N, Phi, rho, alpha, beta1, beta2, gamma, delta, K, truncated):
    if truncated:
        T_in = T if T > 0.0 else 0.0
        N = N if N > 0.0 else 0.0
        Phi = Phi if Phi > 0.0 else 0.0
        T_clamped = min(T_in, K)
    else:
        T_in = T_clamped = T
    r1 = _rates_scalar_raw(T_in, N, Phi, rho, alpha, beta1, beta2, gamma, delta, K)[0]
    _, r2, r3 = _rates_scalar_raw(T_clamped, N, Phi, rho, alpha, beta1, beta2, gamma, delta, K)
    return r1, r2, r3


def _rates_scalar_raw(T, N, Phi, rho, alpha, beta1, beta2, gamma, delta, K):
    t_pos = T if T > 0.0 else 0.0
    phi_pos = Phi if Phi > 0.0 else 0.0
    denom = phi_pos + t_pos
    frac = phi_pos / denom if denom > 0.0 else 0.0
    radicand = 1.0 - frac * frac
    if radicand < 0.0:
        radicand = 0.0
    B = t_pos * math.sqrt(radicand)
    D = t_pos * frac
    logistic = 1.0 - (T + N + Phi) / K
    r1 = rho * D * logistic - alpha * B - beta1 * N * T
    r2 = alpha * B + beta1 * N * T + delta * T * Phi + beta2 * N * Phi
    r3 = (gamma / K) * B * Phi * logistic - delta * T * Phi - beta2 * N * Phi
    return r1, r2, r3


def ode_integrate(y0, dt, n_steps, params, truncated, method, record_every):
    """Fixed-step integration of the pointwise system.

    method: 0 = classical RK4, 1 = explicit Euler.  Records every
    ``record_every``-th step plus the final one.  Returns
    (recorded_step_indices, states, status, fail_step); status 1 flags a
    non-finite state, at which point recording stops.
    """
    rho, alpha, beta1, beta2, gamma, delta, K = (float(v) for v in params)
    T, N, Phi = (float(v) for v in y0)
    trunc = bool(truncated)

    idx = [0]
    states = [(T, N, Phi)]
    for step in range(1, n_steps + 1):
        if method == 0:
            a1, b1, c1 = _rates_scalar(T, N, Phi, rho, alpha, beta1, beta2, gamma, delta, K, trunc)
            a2, b2, c2 = _rates_scalar(T + 0.5 * dt * a1, N + 0.5 * dt * b1, Phi + 0.5 * dt * c1,
                                       rho, alpha, beta1, beta2, gamma, delta, K, trunc)
            a3, b3, c3 = _rates_scalar(T + 0.5 * dt * a2, N + 0.5 * dt * b2, Phi + 0.5 * dt * c2,
                                       rho, alpha, beta1, beta2, gamma, delta, K, trunc)
            a4, b4, c4 = _rates_scalar(T + dt * a3, N + dt * b3, Phi + dt * c3,
                                       rho, alpha, beta1, beta2, gamma, delta, K, trunc)
            T += (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            N += (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            Phi += (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        else:
            a1, b1, c1 = _rates_scalar(T, N, Phi, rho, alpha, beta1, beta2, gamma, delta, K, trunc)
            T += dt * a1
            N += dt * b1
            Phi += dt * c1
        if not (math.isfinite(T) and math.isfinite(N) and math.isfinite(Phi)):
            idx.append(step)
            states.append((T, N, Phi))  # expose the offending state
            return (np.asarray(idx, dtype=np.int64),
                    np.asarray(states, dtype=np.float64), 1, step)
        if step % record_every == 0 or step == n_steps:
            idx.append(step)
            states.append((T, N, Phi))
    return (np.asarray(idx, dtype=np.int64),
            np.asarray(states, dtype=np.float64), 0, -1)
