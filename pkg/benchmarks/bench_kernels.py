"""Benchmark the compiled kernel core against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 200,500,1000,2000]

Times the two hot pairwise primitives (Nadaraya-Watson weight matrices and
product-kernel KDE evaluation) on both backends and reports the speedup.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from retasa import _pykernels

try:
    from retasa import _ckernels
except ImportError:
    _ckernels = None


def best_of(func, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - t0)
    return best


def run(sizes: list[int]) -> None:
    if _ckernels is None:
        print("compiled extension not available; only timing the NumPy fallback")
    rng = np.random.default_rng(0)
    header = f"{'case':<34} {'numpy':>10} {'compiled':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        pts = np.ascontiguousarray(rng.standard_normal((n, 1)))
        cases = [
            ("gaussian_nw_matrix", (pts, pts, 0.3)),
            ("epanechnikov_nw_matrix", (pts, pts, 6.0)),
            ("gaussian_kde_values", (pts, pts, 0.3)),
        ]
        for name, args in cases:
            t_py = best_of(lambda: getattr(_pykernels, name)(*args))
            label = f"{name} n={n}"
            if _ckernels is None:
                print(f"{label:<34} {t_py * 1e3:>8.2f}ms {'-':>10} {'-':>8}")
                continue
            t_c = best_of(lambda: getattr(_ckernels, name)(*args))
            print(
                f"{label:<34} {t_py * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms "
                f"{t_py / t_c:>7.1f}x"
            )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="200,500,1000,2000")
    args = parser.parse_args()
    run([int(s) for s in args.sizes.split(",")])


if __name__ == "__main__":
    main()
