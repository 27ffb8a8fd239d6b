"""Benchmark the compiled trial-verdict kernel against the numpy fallback.

Run: python benchmarks/bench_kernels.py [--trials 200000] [--pool 200] [--take 20]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from probmut.kernels import available_backends
from probmut.mtest import critical_t
from probmut.posterior import _sample_index_rows


def bench(fn, *args, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--pool", type=int, default=200)
    parser.add_argument("--take", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    xh = rng.normal(0.99, 0.005, args.pool)
    xm = rng.normal(0.987, 0.005, args.pool)  # mid-strength separation
    gen = np.random.default_rng(1)

    t0 = time.perf_counter()
    idx_h = _sample_index_rows(gen, args.trials, args.pool, args.take)
    idx_m = _sample_index_rows(gen, args.trials, args.pool, args.take)
    t_sampling = time.perf_counter() - t0

    t2_crit = critical_t(0.05, 2 * args.take - 2) ** 2
    backends = available_backends()
    print(f"workload: {args.trials} trials, {args.take} of {args.pool} per side")
    print(f"index sampling (shared by all backends): {t_sampling:.3f} s")

    results = {}
    for name, mod in backends.items():
        idx_h_c = np.ascontiguousarray(idx_h, dtype=np.intp)
        idx_m_c = np.ascontiguousarray(idx_m, dtype=np.intp)
        dt = bench(mod.statistical_kills, xh, xm, idx_h_c, idx_m_c, t2_crit, 0.25)
        results[name] = dt
        print(f"{name:>8}: {dt:.4f} s  ({args.trials / dt / 1e6:.2f} M trials/s)")

    if len(results) == 2:
        print(f"speedup native vs numpy: {results['numpy'] / results['native']:.1f}x")
    kills = backends[next(iter(backends))].statistical_kills(
        xh, xm, np.ascontiguousarray(idx_h, np.intp), np.ascontiguousarray(idx_m, np.intp), t2_crit, 0.25
    )
    print(f"kill fraction: {kills.mean():.4f}")


if __name__ == "__main__":
    main()
