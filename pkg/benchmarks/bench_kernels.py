#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Covers the three hot paths: Bernstein histogram accumulation (the estimator
inner loop), the weighted basis-derivative contraction (the transport prox
gradient), and the O(N*M) logistic smoothed CDF (soft ranks).

Run:  python benchmarks/bench_kernels.py [--sizes small|full]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from rankdiv import backend
from rankdiv.kernels import bernstein_hist, bernstein_weighted_diff, logistic_cdf


def timeit(fn, *args, repeat=3):
    fn(*args)  # warm-up (JIT compile on the numba path)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", choices=("small", "full"), default="full")
    args = parser.parse_args()

    if args.sizes == "full":
        hist_cases = [(100_000, 64), (100_000, 512), (1_000_000, 64)]
        grad_cases = [(1_000, 128), (10_000, 128)]
        cdf_cases = [(1_000, 1_000), (4_000, 4_000)]
    else:
        hist_cases = [(20_000, 64)]
        grad_cases = [(1_000, 128)]
        cdf_cases = [(1_000, 1_000)]

    rng = np.random.default_rng(0)
    rows = []

    for n, K in hist_cases:
        u = rng.uniform(0, 1, n)
        rows.append((f"bernstein_hist n={n} K={K}", lambda u=u, K=K: bernstein_hist(u, K)))
    for n, K in grad_cases:
        u = rng.uniform(0, 1, n)
        dw = rng.normal(0, 1, K)
        rows.append(
            (f"weighted_diff n={n} K={K}", lambda u=u, K=K, dw=dw: bernstein_weighted_diff(u, K, dw))
        )
    for n, m in cdf_cases:
        x = rng.normal(0, 1, n)
        y = rng.normal(0, 1, m)
        rows.append((f"logistic_cdf N={n} M={m}", lambda x=x, y=y: logistic_cdf(x, y, 0.2)))

    if not backend.HAVE_NUMBA:
        print("numba not available; timing the numpy path only")

    print(f"{'kernel':38s} {'numpy':>12s} {'numba':>12s} {'speedup':>9s}")
    for name, fn in rows:
        backend.use_backend("numpy")
        t_np = timeit(fn)
        if backend.HAVE_NUMBA:
            backend.use_backend("numba")
            t_nb = timeit(fn)
            print(f"{name:38s} {t_np * 1e3:10.2f}ms {t_nb * 1e3:10.2f}ms {t_np / t_nb:8.1f}x")
        else:
            print(f"{name:38s} {t_np * 1e3:10.2f}ms {'-':>12s} {'-':>9s}")
    backend.use_backend("auto")


if __name__ == "__main__":
    main()
