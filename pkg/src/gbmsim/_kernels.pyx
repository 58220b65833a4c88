# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: stencil application, conjugate gradients for the
implicit diffusion solve, reaction-rate evaluation over grids, and the
fixed-step pointwise integrator.  Semantics match gbmsim._kernels_py."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, isfinite

cnp.import_array()

BACKEND_NAME = "compiled"


def laplacian(double[:, ::1] f, double hx, double hy):
    cdef Py_ssize_t nx = f.shape[0]
    cdef Py_ssize_t ny = f.shape[1]
    out_arr = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    _laplacian(f, out, nx, ny, 1.0 / (hx * hx), 1.0 / (hy * hy))
    return out_arr


cdef void _laplacian(double[:, ::1] f, double[:, ::1] out,
                     Py_ssize_t nx, Py_ssize_t ny,
                     double ihx2, double ihy2) noexcept nogil:
    cdef Py_ssize_t i, j, im, ip, jm, jp
    for i in range(nx):
        im = i - 1 if i > 0 else 0
        ip = i + 1 if i < nx - 1 else nx - 1
        for j in range(ny):
            jm = j - 1 if j > 0 else 0
            jp = j + 1 if j < ny - 1 else ny - 1
            out[i, j] = (f[im, j] - 2.0 * f[i, j] + f[ip, j]) * ihx2 \
                      + (f[i, jm] - 2.0 * f[i, j] + f[i, jp]) * ihy2


def helmholtz_apply(double[:, ::1] f, double hx, double hy, double c):
    cdef Py_ssize_t nx = f.shape[0]
    cdef Py_ssize_t ny = f.shape[1]
    out_arr = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    _helmholtz(f, out, nx, ny, 1.0 / (hx * hx), 1.0 / (hy * hy), c)
    return out_arr


cdef void _helmholtz(double[:, ::1] f, double[:, ::1] out,
                     Py_ssize_t nx, Py_ssize_t ny,
                     double ihx2, double ihy2, double c) noexcept nogil:
    cdef Py_ssize_t i, j, im, ip, jm, jp
    for i in range(nx):
        im = i - 1 if i > 0 else 0
        ip = i + 1 if i < nx - 1 else nx - 1
        for j in range(ny):
            jm = j - 1 if j > 0 else 0
            jp = j + 1 if j < ny - 1 else ny - 1
            out[i, j] = f[i, j] - c * ((f[im, j] - 2.0 * f[i, j] + f[ip, j]) * ihx2
                                       + (f[i, jm] - 2.0 * f[i, j] + f[i, jp]) * ihy2)


cdef double _dot(double[:, ::1] a, double[:, ::1] b,
                 Py_ssize_t nx, Py_ssize_t ny) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i, j
    for i in range(nx):
        for j in range(ny):
            acc += a[i, j] * b[i, j]
    return acc


def helmholtz_cg(double[:, ::1] b, double[:, ::1] x0, double hx, double hy,
                 double c, double tol, long maxiter):
    cdef Py_ssize_t nx = b.shape[0]
    cdef Py_ssize_t ny = b.shape[1]
    cdef double ihx2 = 1.0 / (hx * hx)
    cdef double ihy2 = 1.0 / (hy * hy)

    x_arr = np.array(x0, dtype=np.float64, copy=True)
    r_arr = np.empty((nx, ny), dtype=np.float64)
    p_arr = np.empty((nx, ny), dtype=np.float64)
    ap_arr = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] x = x_arr
    cdef double[:, ::1] r = r_arr
    cdef double[:, ::1] p = p_arr
    cdef double[:, ::1] ap = ap_arr

    cdef double bnorm, rs, rs_new, alpha, beta
    cdef Py_ssize_t i, j
    cdef long iters = 0

    with nogil:
        bnorm = sqrt(_dot(b, b, nx, ny))
    if bnorm == 0.0:
        x_arr[...] = 0.0
        return x_arr, 0, 0.0

    with nogil:
        _helmholtz(x, ap, nx, ny, ihx2, ihy2, c)
        for i in range(nx):
            for j in range(ny):
                r[i, j] = b[i, j] - ap[i, j]
                p[i, j] = r[i, j]
        rs = _dot(r, r, nx, ny)
        while iters < maxiter and sqrt(rs) > tol * bnorm:
            _helmholtz(p, ap, nx, ny, ihx2, ihy2, c)
            alpha = rs / _dot(p, ap, nx, ny)
            for i in range(nx):
                for j in range(ny):
                    x[i, j] += alpha * p[i, j]
                    r[i, j] -= alpha * ap[i, j]
            rs_new = _dot(r, r, nx, ny)
            beta = rs_new / rs
            for i in range(nx):
                for j in range(ny):
                    p[i, j] = r[i, j] + beta * p[i, j]
            rs = rs_new
            iters += 1
    return x_arr, iters, sqrt(rs) / bnorm


cdef inline void _rates_point(double T, double N, double Phi,
                              double rho, double alpha, double beta1,
                              double beta2, double gamma, double delta,
                              double K, bint truncated,
                              double* r1, double* r2, double* r3) noexcept nogil:
    cdef double T1, Tk, n, phi
    if truncated:
        T1 = T if T > 0.0 else 0.0
        n = N if N > 0.0 else 0.0
        phi = Phi if Phi > 0.0 else 0.0
        Tk = T1 if T1 < K else K
    else:
        T1 = Tk = T
        n = N
        phi = Phi
    r1[0] = _rate1(T1, n, phi, rho, alpha, beta1, K)
    _rate23(Tk, n, phi, alpha, beta1, beta2, gamma, delta, K, r2, r3)


cdef inline double _rate1(double T, double N, double Phi,
                          double rho, double alpha, double beta1,
                          double K) noexcept nogil:
    cdef double t_pos = T if T > 0.0 else 0.0
    cdef double phi_pos = Phi if Phi > 0.0 else 0.0
    cdef double denom = phi_pos + t_pos
    cdef double frac = phi_pos / denom if denom > 0.0 else 0.0
    cdef double radicand = 1.0 - frac * frac
    if radicand < 0.0:
        radicand = 0.0
    cdef double B = t_pos * sqrt(radicand)
    cdef double D = t_pos * frac
    cdef double logistic = 1.0 - (T + N + Phi) / K
    return rho * D * logistic - alpha * B - beta1 * N * T


cdef inline void _rate23(double T, double N, double Phi,
                         double alpha, double beta1, double beta2,
                         double gamma, double delta, double K,
                         double* r2, double* r3) noexcept nogil:
    cdef double t_pos = T if T > 0.0 else 0.0
    cdef double phi_pos = Phi if Phi > 0.0 else 0.0
    cdef double denom = phi_pos + t_pos
    cdef double frac = phi_pos / denom if denom > 0.0 else 0.0
    cdef double radicand = 1.0 - frac * frac
    if radicand < 0.0:
        radicand = 0.0
    cdef double B = t_pos * sqrt(radicand)
    cdef double logistic = 1.0 - (T + N + Phi) / K
    r2[0] = alpha * B + beta1 * N * T + delta * T * Phi + beta2 * N * Phi
    r3[0] = (gamma / K) * B * Phi * logistic - delta * T * Phi - beta2 * N * Phi


def reaction_rates(double[:, ::1] T, double[:, ::1] N, double[:, ::1] Phi,
                   double rho, double alpha, double beta1, double beta2,
                   double gamma, double delta, double K, bint truncated):
    cdef Py_ssize_t nx = T.shape[0]
    cdef Py_ssize_t ny = T.shape[1]
    r1_arr = np.empty((nx, ny), dtype=np.float64)
    r2_arr = np.empty((nx, ny), dtype=np.float64)
    r3_arr = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] r1 = r1_arr
    cdef double[:, ::1] r2 = r2_arr
    cdef double[:, ::1] r3 = r3_arr
    cdef Py_ssize_t i, j
    cdef double a, bb, cc
    with nogil:
        for i in range(nx):
            for j in range(ny):
                _rates_point(T[i, j], N[i, j], Phi[i, j],
                             rho, alpha, beta1, beta2, gamma, delta, K,
                             truncated, &a, &bb, &cc)
                r1[i, j] = a
                r2[i, j] = bb
                r3[i, j] = cc
    return r1_arr, r2_arr, r3_arr


def ode_integrate(y0, double dt, long n_steps, params, bint truncated,
                  int method, long record_every):
    cdef double rho = params[0]
    cdef double alpha = params[1]
    cdef double beta1 = params[2]
    cdef double beta2 = params[3]
    cdef double gamma = params[4]
    cdef double delta = params[5]
    cdef double K = params[6]
    cdef double T = y0[0]
    cdef double N = y0[1]
    cdef double Phi = y0[2]

    cdef long n_rec = n_steps // record_every + 2
    idx_arr = np.empty(n_rec, dtype=np.int64)
    states_arr = np.empty((n_rec, 3), dtype=np.float64)
    cdef long[::1] idx = idx_arr
    cdef double[:, ::1] states = states_arr

    cdef long step, count = 1, fail_step = -1
    cdef int status = 0
    cdef double a1, b1, c1, a2, b2, c2, a3, b3, c3, a4, b4, c4

    idx[0] = 0
    states[0, 0] = T
    states[0, 1] = N
    states[0, 2] = Phi

    with nogil:
        for step in range(1, n_steps + 1):
            if method == 0:
                _rates_point(T, N, Phi, rho, alpha, beta1, beta2, gamma, delta,
                             K, truncated, &a1, &b1, &c1)
                _rates_point(T + 0.5 * dt * a1, N + 0.5 * dt * b1, Phi + 0.5 * dt * c1,
                             rho, alpha, beta1, beta2, gamma, delta, K, truncated,
                             &a2, &b2, &c2)
                _rates_point(T + 0.5 * dt * a2, N + 0.5 * dt * b2, Phi + 0.5 * dt * c2,
                             rho, alpha, beta1, beta2, gamma, delta, K, truncated,
                             &a3, &b3, &c3)
                _rates_point(T + dt * a3, N + dt * b3, Phi + dt * c3,
                             rho, alpha, beta1, beta2, gamma, delta, K, truncated,
                             &a4, &b4, &c4)
                T += (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
                N += (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                Phi += (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
            else:
                _rates_point(T, N, Phi, rho, alpha, beta1, beta2, gamma, delta,
                             K, truncated, &a1, &b1, &c1)
                T += dt * a1
                N += dt * b1
                Phi += dt * c1
            if not (isfinite(T) and isfinite(N) and isfinite(Phi)):
                status = 1
                fail_step = step
                idx[count] = step  # expose the offending state
                states[count, 0] = T
                states[count, 1] = N
                states[count, 2] = Phi
                count += 1
                break
            if step % record_every == 0 or step == n_steps:
                idx[count] = step
                states[count, 0] = T
                states[count, 1] = N
                states[count, 2] = Phi
                count += 1
    return idx_arr[:count], states_arr[:count], status, fail_step
