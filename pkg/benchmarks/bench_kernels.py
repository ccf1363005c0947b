"""Time the numba kernels against the pure-numpy fallback.

Kernel-level timings run both implementations in one process (both are
importable regardless of which one is active).  The optional end-to-end
forest comparison re-invokes this script in a subprocess with
FORESTDISTILL_DISABLE_NUMBA=1, since the backend is chosen at import time.

Usage: python3 benchmarks/bench_kernels.py [--end-to-end] [--repeats N]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from forestdistill import _kernels
from forestdistill.forest import ForestParams, fit_forest, predict_proba


def bench(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - started)
    return best


def split_workload(rng, n, d, classes=3):
    X = np.sort(rng.normal(size=(n, d)), axis=0)
    y = rng.integers(0, classes, size=n)
    return X, y, classes, 1


def forest_workload(rng, n=4000, d=12, classes=3):
    X = rng.normal(size=(n, d))
    y = rng.integers(0, classes, size=n)
    forest = fit_forest(X, y, params=ForestParams(n_trees=30), seed=0)
    return X, forest


def kernel_table(repeats):
    rng = np.random.default_rng(0)
    rows = []
    for n in (200, 2000, 20000):
        args = split_workload(rng, n, 8)
        t_numba = bench(_kernels._split_scan_numba, args, repeats)
        t_numpy = bench(_kernels._split_scan_numpy, args, repeats)
        rows.append((f"split_scan n={n} d=8", t_numba, t_numpy))
    X, forest = forest_workload(rng)
    args = (X, forest.features, forest.thresholds, forest.lefts,
            forest.rights, forest.leaf_dist, forest.offsets)
    t_numba = bench(_kernels._apply_forest_numba, args, repeats)
    t_numpy = bench(_kernels._apply_forest_numpy, args, repeats)
    rows.append(("apply_forest n=4000 t=30", t_numba, t_numpy))
    return rows


def end_to_end_seconds():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(2000, 10))
    y = rng.integers(0, 3, size=2000)
    _kernels.warmup()
    started = time.perf_counter()
    forest = fit_forest(X, y, params=ForestParams(n_trees=20), seed=0)
    predict_proba(forest, X)
    return time.perf_counter() - started


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--end-to-end", action="store_true",
                        help="also time a full forest fit under each backend")
    parser.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.inner:
        print(f"{end_to_end_seconds():.6f}")
        return

    if not _kernels.HAVE_NUMBA:
        print("numba backend unavailable (flag set or import failed); "
              "kernel table needs both backends", file=sys.stderr)
        raise SystemExit(1)

    _kernels.warmup()
    print(f"{'workload':28s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, t_numba, t_numpy in kernel_table(args.repeats):
        print(f"{name:28s} {t_numba * 1e3:9.2f}ms {t_numpy * 1e3:9.2f}ms "
              f"{t_numpy / t_numba:7.1f}x")

    if args.end_to_end:
        here = os.path.abspath(__file__)
        times = {}
        for backend, env_flag in (("numba", "0"), ("numpy", "1")):
            env = dict(os.environ, FORESTDISTILL_DISABLE_NUMBA=env_flag)
            out = subprocess.run(
                [sys.executable, here, "--inner"], env=env,
                capture_output=True, text=True, check=True,
            )
            times[backend] = float(out.stdout.strip())
        print(f"{'forest fit+apply (subproc)':28s} {times['numba'] * 1e3:9.2f}ms "
              f"{times['numpy'] * 1e3:9.2f}ms {times['numpy'] / times['numba']:7.1f}x")


if __name__ == "__main__":
    main()
