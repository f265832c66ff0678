#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Run from the repository root after building the extension:

    python benchmarks/bench_backends.py [--repeats 5]

Each kernel is timed on a workload shaped like a realistic large prediction
dump (long clips, many proposals). The compiled backend matters most for the
projection loop and soft-NMS, whose inner iterations are sequential.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tfloc import _kernels_py

try:
    from tfloc import _native
except ImportError:
    _native = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_workloads(rng):
    workloads = {}

    T, M = 256, 4
    S = rng.dirichlet(np.ones(M), size=T)
    A = rng.uniform(0.2, 0.9, T)
    P = rng.dirichlet(np.ones(M), size=T)
    target = (A / T) @ P
    target[0] = 1.0 - target[1:].sum()

    def ips(mod):
        Q = S.copy()
        mod.ips_iterate(Q, A, target, 1e-12, 2000, 1e-12)

    workloads["ips_iterate (T=256, m=3, 2000 iters)"] = ips

    K = 400
    R = rng.dirichlet(np.ones(K), size=K)
    w0 = rng.uniform(0, 1, K)
    workloads["diffuse_power (K=400, 200 iters)"] = lambda mod: mod.diffuse_power(
        R, w0, 0.7, 200
    )

    n_prop, T_fuse = 500, 4096
    starts = rng.uniform(0, T_fuse - 64, n_prop)
    ends = starts + rng.uniform(4, 64, n_prop)
    channels = rng.integers(1, 4, n_prop).astype(np.int64)
    weights = rng.uniform(0, 1, n_prop)
    workloads["fuse_wavelets (K=500, T=4096)"] = lambda mod: mod.fuse_wavelets(
        starts, ends, channels, weights, T_fuse, 3
    )

    x = rng.uniform(0, 1, 65536)
    def runs(mod):
        for thr in np.arange(0.1, 1.0, 0.1):
            mod.threshold_runs(x, float(thr), 2)

    workloads["threshold_runs (T=65536, 9 thresholds)"] = runs

    n_nms = 1500
    s2 = rng.uniform(0, 5000, n_nms)
    e2 = s2 + rng.uniform(1, 120, n_nms)
    sc = rng.uniform(0, 1, n_nms)
    at = rng.integers(1, 4, n_nms).astype(np.int64)
    workloads["soft_nms (K=1500)"] = lambda mod: mod.soft_nms_order(
        s2, e2, sc, at, 0.5, 1e-4, 1500
    )
    return workloads


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    workloads = make_workloads(rng)

    name_w = max(len(n) for n in workloads) + 2
    print(f"{'kernel'.ljust(name_w)}{'python':>12}{'c':>12}{'speedup':>10}")
    print("-" * (name_w + 34))
    for name, fn in workloads.items():
        t_py = timeit(lambda: fn(_kernels_py), args.repeats)
        if _native is None:
            print(f"{name.ljust(name_w)}{t_py * 1e3:>10.2f}ms{'n/a':>12}{'n/a':>10}")
            continue
        t_c = timeit(lambda: fn(_native), args.repeats)
        print(
            f"{name.ljust(name_w)}{t_py * 1e3:>10.2f}ms{t_c * 1e3:>10.2f}ms"
            f"{t_py / t_c:>9.1f}x"
        )
    if _native is None:
        print("\ncompiled backend unavailable; build it with 'pip install -e .'")


if __name__ == "__main__":
    main()
