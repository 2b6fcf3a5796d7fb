#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Both backend modules are imported directly (the MEANINEQ_BACKEND flag only
controls which one the package uses), each kernel is warmed up once, and
the best of `--repeat` timed runs is reported per backend.

Usage: python benchmarks/bench_backends.py [--repeat 5] [--scale 1.0]
"""

import argparse
import time

import numpy as np

from meanineq import _kernels_numba as nb
from meanineq import _kernels_numpy as npk


def timeit(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(scale):
    rng = np.random.default_rng(0)
    b_mean = int(200_000 * scale)
    b_eig = int(20_000 * scale)
    b_chi = int(1_000_000 * scale)
    b_def = int(100_000 * scale)
    lam4 = np.full(4, 0.25)
    x_mean = np.exp(rng.uniform(-3, 3, (b_mean, 4)))
    mats = rng.standard_normal((b_eig, 6, 6))
    mats = 0.5 * (mats + np.swapaxes(mats, 1, 2))
    t_chi = np.exp(rng.uniform(-6, 6, b_chi))
    rs = np.array([[2.0, 0.0], [1.5, 0.5], [3.0, -1.0]])
    lams = np.vstack([np.full(2, 0.5)] * 3)
    x_def = np.exp(rng.uniform(-3, 3, (b_def, 2, 2)))
    c0 = rng.uniform(-5, 5, b_def)
    c = rng.uniform(-5, 5, (b_def, 6))
    return [
        ("gini_mean_batch", f"{b_mean} x n=4", (2.0, 1.0, lam4, x_mean)),
        ("chi_batch", f"{b_chi}", (2.0, 1.0, t_chi)),
        ("eigvals_sym_batch", f"{b_eig} x 6x6", (mats,)),
        ("deficiency_gini_batch", f"{b_def} x 2x2 sum", (0, rs, lams, x_def)),
        ("classify_shifted_batch", f"{b_def} x k=6", (c0, c, 1e-12, 1e-12)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0, help="workload size multiplier")
    args = ap.parse_args()

    rows = []
    for name, size, wargs in workloads(args.scale):
        f_np = getattr(npk, name)
        f_nb = getattr(nb, name)
        out_np = f_np(*wargs)
        out_nb = f_nb(*wargs)  # also triggers compilation
        worst = np.max(np.abs(np.asarray(out_np, float) - np.asarray(out_nb, float)))
        t_np = timeit(f_np, wargs, args.repeat)
        t_nb = timeit(f_nb, wargs, args.repeat)
        rows.append((name, size, t_np, t_nb, t_np / t_nb, worst))

    hdr = f"{'kernel':<24} {'size':<18} {'numpy':>10} {'numba':>10} {'speedup':>8} {'max|diff|':>10}"
    print(hdr)
    print("-" * len(hdr))
    for name, size, t_np, t_nb, speedup, worst in rows:
        print(
            f"{name:<24} {size:<18} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
            f"{speedup:>7.1f}x {worst:>10.2e}"
        )


if __name__ == "__main__":
    main()
