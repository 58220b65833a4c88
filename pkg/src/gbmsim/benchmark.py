"""Benchmark the compiled kernels against the pure-Python fallback.

Run as ``python -m gbmsim.benchmark [--size N] [--repeat R]``.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import backend


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(size: int = 128, repeat: int = 5, ode_steps: int = 20_000):
    rng = np.random.default_rng(7)
    f = rng.random((size, size))
    T = rng.random((size, size)) * 0.8
    N = rng.random((size, size)) * 0.5
    Phi = rng.random((size, size)) * 0.5
    hx = hy = 4.0 / size
    c = 0.01
    params = (1.0, 0.03, 0.03, 0.03, 0.003, 0.3, 1.0)
    y0 = np.array([0.4, 0.1, 0.3])

    cases = {
        "laplacian": lambda impl: impl.laplacian(f, hx, hy),
        "helmholtz_cg(tol=1e-10)": lambda impl: impl.helmholtz_cg(
            f, np.zeros_like(f), hx, hy, c, 1e-10, 10 * size * size),
        "reaction_rates": lambda impl: impl.reaction_rates(T, N, Phi, *params, True),
        f"rk4 x{ode_steps}": lambda impl: impl.ode_integrate(
            y0, 0.01, ode_steps, params, True, 0, ode_steps),
    }

    impls = dict(backend.implementations())
    print(f"active backend: {backend.BACKEND}; grid {size}x{size}, best of {repeat}")
    header = f"{'kernel':28s} " + " ".join(f"{name:>12s}" for name in impls)
    if len(impls) > 1:
        header += f" {'speedup':>9s}"
    print(header)
    for label, fn in cases.items():
        times = {name: _time(lambda impl=impl: fn(impl), repeat)
                 for name, impl in impls.items()}
        row = f"{label:28s} " + " ".join(f"{times[name] * 1e3:10.3f}ms" for name in impls)
        if "python" in times and "compiled" in times:
            row += f" {times['python'] / times['compiled']:8.1f}x"
        print(row)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--ode-steps", type=int, default=20_000)
    args = parser.parse_args(argv)
    run(args.size, args.repeat, args.ode_steps)


if __name__ == "__main__":
    main()
