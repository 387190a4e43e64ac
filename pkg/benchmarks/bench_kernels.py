"""Timing of the Green-convolution kernel: compiled recurrence vs numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--sizes 1201 4801 19201] [--repeat 20]``.
"""
import argparse
import timeit

import numpy as np

from nativespace import _pykernels
from nativespace.kernels import BACKEND

try:
    from nativespace import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def bench(fn, q, dx, m, repeat):
    return min(timeit.repeat(lambda: fn(q, dx, m), number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[1201, 4801, 19201])
    parser.add_argument("--orders", type=int, nargs="+", default=[1, 2, 4])
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args(argv)
    print(f"active backend: {BACKEND}")
    if _ckernels is None:
        print("compiled extension unavailable; timing the numpy fallback only")
    print(f"{'n':>7} {'m':>2} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8} {'max rel diff':>13}")
    rng = np.random.default_rng(0)
    for n in args.sizes:
        q = rng.normal(size=n)
        dx = 24.0 / (n - 1)
        for m in args.orders:
            t_py = bench(_pykernels.green_sums, q, dx, m, args.repeat)
            if _ckernels is None:
                print(f"{n:>7} {m:>2} {t_py * 1e3:>10.3f} {'-':>10} {'-':>8} {'-':>13}")
                continue
            t_c = bench(_ckernels.green_sums, q, dx, m, args.repeat)
            ref = _pykernels.green_sums(q, dx, m)
            diff = np.max(np.abs(np.asarray(_ckernels.green_sums(q, dx, m)) - ref)) / np.max(np.abs(ref))
            print(f"{n:>7} {m:>2} {t_py * 1e3:>10.3f} {t_c * 1e3:>10.3f} {t_py / t_c:>8.1f} {diff:>13.1e}")


if __name__ == "__main__":
    main()
