"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each hot kernel on representative workloads and prints a table of
per-call times and speedups.  The numba path is warmed up first so JIT
compilation is not counted.

Usage: python benchmarks/bench_kernels.py [--steps N] [--grid-step H]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import signopt as so
from signopt.kernels import _numba, _numpy
from signopt.objective import locals_arrays

MEDIAN_DATA = (4.45, 14.99, 24.28, 26.21, 44.24, 58.61, 68.78, 75.49)


def median_args(algo, steps, sigma=0.0, pe=1.0, lam=1.05):
    g = so.ring(8, 1.0)
    locs = tuple(so.Quantile(0.5, y, 1.0) for y in MEDIAN_DATA)
    eu, ev, ew = g.edge_arrays()
    lkind, lp = locals_arrays(locs)
    rec_ks = np.arange(0, steps + 1, max(1, steps // 100), dtype=np.int64)
    if rec_ks[-1] != steps:
        rec_ks = np.append(rec_ks, steps)
    x0 = np.linspace(4.45, 75.49, 8)
    return (algo, x0, eu, ev, ew, np.full(8, pe), np.full(8, sigma), lkind, lp,
            lam, np.uint64(1), 2, 100.0, 10.0, steps, rec_ks, 26.21, 44.24,
            steps - steps // 10 + 1)


def grid_args(step):
    g = so.ring(4, 1.0)
    locs = tuple(so.AbsDeviation(s) for s in (0.0, 2.0, 4.0, 6.0))
    eu, ev, ew = g.edge_arrays()
    lkind, lp = locals_arrays(locs)
    npts = int(round(8.0 / step)) + 1
    return (eu, ev, ew, lkind, lp, 1.05, -1.0, step, npts, 1e-9)


def timed(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description="Compare numba and numpy kernel backends")
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--grid-step", type=float, default=0.2)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    cases = [
        ("run sign-exchange (8 nodes)", "run_sim", median_args(0, args.steps)),
        ("run noisy signs (sigma=3)", "run_sim", median_args(1, args.steps, sigma=3.0, lam=2.0)),
        ("run activated edges (p=0.6)", "run_sim", median_args(2, args.steps, pe=0.6, lam=2.0)),
        (f"grid scan (step {args.grid_step:g})", "grid_scan", grid_args(args.grid_step)),
    ]

    # warm up the JIT once per kernel
    for _, fname, a in cases:
        getattr(_numba, fname)(*a)

    rows = []
    for label, fname, a in cases:
        t_nb = timed(getattr(_numba, fname), a, args.repeats)
        t_np = timed(getattr(_numpy, fname), a, args.repeats)
        rows.append((label, t_nb, t_np, t_np / t_nb))

    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for label, t_nb, t_np, ratio in rows:
        print(f"{label:<{width}}  {t_nb * 1e3:>8.1f}ms  {t_np * 1e3:>8.1f}ms  {ratio:>7.1f}x")


if __name__ == "__main__":
    main()
