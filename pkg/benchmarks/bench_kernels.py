#!/usr/bin/env python3
"""Benchmark the numba-compiled kernels against the pure-Python fallbacks.

The dispatched names in gaplab.kernels are compiled unless GAPLAB_JIT=0;
the underscore-prefixed originals always run interpreted, so both paths can
be timed in one process.  Usage:

    python benchmarks/bench_kernels.py [N]

with N the tridiagonal size (default 65536).
"""

import math
import sys
import time

import numpy as np

from gaplab import Grid, Step, assemble, kernels
from gaplab._jit import JIT_ENABLED


def timeit(fn, *args, repeat=5):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 65536
    if not JIT_ENABLED:
        print("numba JIT is disabled (GAPLAB_JIT=0 or numba missing); "
              "both columns will run the interpreted path")

    L = 10.0
    op = assemble(Step(1.0, (-0.5, 0.5)), Grid(L, n))
    diag = np.ascontiguousarray(op.diag)
    off = np.ascontiguousarray(op.offdiag)
    off2 = off * off
    pivmin = max(float(off2.max()), 1.0) * 1e-250
    lo = float(diag.min() - 2 * np.abs(off).max())
    hi = float(np.abs(diag).max() + 2 * np.abs(off).max())
    start = np.random.default_rng(0).uniform(-1.0, 1.0, n)
    breaks = np.array([-L / 2, -0.5, 0.5, L / 2])
    vals = np.array([0.0, 1.0, 0.0])
    steps = 20000

    # warm up compilation outside the timed region
    kernels.sturm_count(diag, off2, 0.05, pivmin)
    kernels.bisect_eigenvalue(diag, off2, 0, lo, hi, pivmin)
    lam0 = kernels.bisect_eigenvalue(diag, off2, 0, lo, hi, pivmin)
    kernels.inverse_iteration(diag, off, lam0, start, np.zeros(1), False, 50, 1e-12, 1e-6, pivmin)
    kernels.prufer_theta_piecewise(breaks, vals, 0.08, steps)
    kernels.profile_rk4_capped(1.0, 4.0, 0.7, L / 2, 513, 16)

    rows = [
        ("sturm_count", kernels.sturm_count, kernels._sturm_count,
         (diag, off2, 0.05, pivmin)),
        ("bisect_eigenvalue", kernels.bisect_eigenvalue, kernels._bisect_eigenvalue,
         (diag, off2, 0, lo, hi, pivmin)),
        ("inverse_iteration", kernels.inverse_iteration, kernels._inverse_iteration,
         (diag, off, lam0, start, np.zeros(1), False, 50, 1e-12, 1e-6, pivmin)),
        ("prufer_theta (20k steps)", kernels.prufer_theta_piecewise,
         kernels._prufer_theta_piecewise, (breaks, vals, 0.08, steps)),
        ("profile_rk4 (8k steps)", kernels.profile_rk4_capped,
         kernels._profile_rk4_capped, (1.0, 4.0, 0.7, L / 2, 513, 16)),
    ]

    print(f"tridiagonal size N = {n}")
    print(f"{'kernel':26s} {'jit [ms]':>10s} {'python [ms]':>12s} {'speedup':>9s}")
    for name, fast, slow, args in rows:
        t_fast, _ = timeit(fast, *args)
        # the interpreted bisection resolves sturm_count at call time; pin it
        # to the interpreted version so the python column is self-consistent
        saved = kernels.sturm_count
        kernels.sturm_count = kernels._sturm_count
        try:
            t_slow, _ = timeit(slow, *args, repeat=1 if n > 16384 else 3)
        finally:
            kernels.sturm_count = saved
        print(f"{name:26s} {1e3 * t_fast:10.3f} {1e3 * t_slow:12.3f} "
              f"{t_slow / t_fast:8.1f}x")


if __name__ == "__main__":
    main()
