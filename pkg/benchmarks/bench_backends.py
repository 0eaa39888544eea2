#!/usr/bin/env python3
"""Timing comparison of the compiled kernels against the numpy fallback.

Covers the per-mode micro-kernels and a full nonlinear trajectory, at the
grid sizes the studies actually run. Usage: python benchmarks/bench_backends.py
"""

import time

import numpy as np

from torus4nls import kernels
from torus4nls.dynamics import SolverConfig, _semigroup_factors_cached, integrate
from torus4nls.exact import integrable_coefficients
from torus4nls.sampling import random_field, rng_for
from torus4nls.spectral import GridSpec

MICRO_SIZES = (64, 256, 1024)
REPEAT = 2000


def best_of(fn, repeat=5):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def micro_suite(impl, n):
    grid = GridSpec(n)
    rng = np.random.default_rng(n)
    coeffs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    u, du, d2u = (rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(3))
    lam = (0.7, -0.3, 0.2, -0.5, 0.4, 0.1)
    w = grid.sobolev_weights(4)
    order = grid.mode_order
    factors = impl.semigroup_factors(grid.modes, 1e-3, 0.1, 1.0)
    return {
        "semigroup_factors": lambda: [
            impl.semigroup_factors(grid.modes, 1e-3, 0.1, 1.0) for _ in range(REPEAT)
        ],
        "apply_multiplier": lambda: [
            impl.apply_multiplier(coeffs, factors) for _ in range(REPEAT)
        ],
        "nonlinear_combine": lambda: [
            impl.nonlinear_combine(u, du, d2u, lam) for _ in range(REPEAT)
        ],
        "weighted_norm_sq": lambda: [
            impl.weighted_norm_sq(coeffs, w, order) for _ in range(REPEAT)
        ],
    }


def run_micro(backends):
    print(f"micro-kernels, best of 5 x {REPEAT} calls, microseconds per call")
    header = f"{'kernel':20s} {'N':>5s} " + " ".join(f"{b:>10s}" for b in backends)
    if len(backends) == 2:
        header += f" {'speedup':>8s}"
    print(header)
    for n in MICRO_SIZES:
        suites = {b: micro_suite(kernels.get_backend(b), n) for b in backends}
        for name in suites[backends[0]]:
            per_call = {
                b: best_of(suites[b][name]) / REPEAT * 1e6 for b in backends
            }
            row = f"{name:20s} {n:5d} " + " ".join(
                f"{per_call[b]:10.2f}" for b in backends
            )
            if len(backends) == 2:
                row += f" {per_call[backends[0]] / per_call[backends[1]]:7.2f}x"
            print(row)


def run_trajectory(backends):
    print("\nfull nonlinear trajectory (Picard stepper), milliseconds")
    coeffs = integrable_coefficients(1.0)
    for n, dt, t_end in ((64, 1e-3, 0.1), (256, 5e-4, 0.02)):
        grid = GridSpec(n)
        data = random_field(grid, rng_for(17), decay=2.0, hm_norm=0.4, m=4, max_mode=4)
        cfg = SolverConfig(dt=dt, sobolev_index_m=4)
        times = {}
        for b in backends:
            kernels.use_backend(b)
            _semigroup_factors_cached.cache_clear()
            times[b] = best_of(lambda: integrate(data, t_end, cfg, coeffs), repeat=3) * 1e3
        row = f"N={n:4d} steps={int(t_end/dt):4d}  " + "  ".join(
            f"{b}: {times[b]:8.1f} ms" for b in backends
        )
        if len(backends) == 2:
            row += f"  speedup {times[backends[0]] / times[backends[1]]:.2f}x"
        print(row)
    kernels.use_backend(kernels.available_backends()[-1])
    _semigroup_factors_cached.cache_clear()


def main():
    backends = kernels.available_backends()
    print(f"available backends: {backends} (active: {kernels.BACKEND})")
    if len(backends) < 2:
        print("compiled extension not built; timing the numpy fallback only")
    run_micro(backends)
    run_trajectory(backends)


if __name__ == "__main__":
    main()
