"""Time the numba and numpy Hermite kernels on a fiber-sized workload.

    python3 benchmarks/bench_kernels.py [--size 256] [--points 512] [--repeat 5]
"""

import argparse
import time

import numpy as np

from magedge import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--points", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    y = np.linspace(-25.0, 25.0, args.points)
    shift = -0.5 * y**2
    coeffs = np.random.default_rng(0).standard_normal((args.size, 8))
    impls = [_kernels.numpy_impl] + ([_kernels.numba_impl] if _kernels.numba_impl else [])
    for impl in impls:
        impl.hermite_table(args.size, y, shift)  # warm-up / JIT
        t_tab = best_of(lambda: impl.hermite_table(args.size, y, shift), args.repeat)
        t_ser = best_of(lambda: impl.hermite_series(coeffs, y, shift), args.repeat)
        print(f"{impl.name:6s} table {t_tab * 1e3:8.3f} ms   series {t_ser * 1e3:8.3f} ms")
    if _kernels.numba_impl:
        a, _ = _kernels.numpy_impl.hermite_table(args.size, y, shift)
        b, _ = _kernels.numba_impl.hermite_table(args.size, y, shift)
        print(f"max |numpy - numba| = {np.max(np.abs(a - b)):.3e}")


if __name__ == "__main__":
    main()
