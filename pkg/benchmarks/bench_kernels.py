"""Benchmark the compiled kernels against the NumPy fallback.

Times ``ba_capacity`` and ``ba_rate_distortion`` on random problem batches
with both backends and prints a comparison table.

    python3 benchmarks/bench_kernels.py --sizes 4 16 64 --repeats 5
"""

import argparse
import time

import numpy as np

from cas_limits import _kernels_py

try:
    from cas_limits import _kernels_c
except ImportError:
    _kernels_c = None


def random_channel(rng, nx, ny):
    a = rng.gamma(1.0, 1.0, (nx, ny)) + 1e-3
    return a / a.sum(axis=1, keepdims=True)


def random_source(rng, n):
    a = rng.gamma(1.0, 1.0, n) + 1e-3
    return a / a.sum()


def bench_capacity(impl, problems, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for w, penalty in problems:
            impl.ba_capacity(w, penalty, 1e-12, 100_000)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_rd(impl, problems, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for p, d, beta in problems:
            impl.ba_rate_distortion(p, d, beta, 1e-13, 100_000)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 16, 64],
                        help="alphabet sizes to benchmark")
    parser.add_argument("--problems", type=int, default=20,
                        help="random problems per size")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats (best of N)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _kernels_c is None:
        print("compiled backend not available; timing the NumPy fallback only")
    backends = [("python", _kernels_py)]
    if _kernels_c is not None:
        backends.append(("cython", _kernels_c))

    rng = np.random.default_rng(args.seed)
    header = f"{'kernel':>18} {'size':>5}" + "".join(f" {name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f" {'speedup':>8}"
    print(header)
    for size in args.sizes:
        cap_problems = [
            (random_channel(rng, size, size), rng.uniform(0.0, 1.0, size))
            for _ in range(args.problems)
        ]
        rd_problems = [
            (random_source(rng, size), rng.uniform(0.0, 1.0, (size, size)), 2.0)
            for _ in range(args.problems)
        ]
        for label, bench, problems in (
            ("ba_capacity", bench_capacity, cap_problems),
            ("ba_rate_distortion", bench_rd, rd_problems),
        ):
            times = [bench(impl, problems, args.repeats) for _, impl in backends]
            row = f"{label:>18} {size:>5}" + "".join(f" {t * 1e3:>10.2f}ms" for t in times)
            if len(times) == 2:
                row += f" {times[0] / times[1]:>7.2f}x"
            print(row)


if __name__ == "__main__":
    main()
