"""Benchmark the longest-common-extension table kernels.

Usage: ``python -m fclogic.bench [--sizes 256,1024,4096] [--repeat 3]``

Compares the numba @njit kernel against the pure-numpy fallback on random
words, reporting the best wall time of each over the repeats.  The first
numba call includes JIT compilation and is excluded via a warmup run.
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from fclogic import kernels


def _random_codes(n: int, rng: random.Random) -> np.ndarray:
    return np.array([rng.randrange(ord("a"), ord("a") + 4) for _ in range(n)], dtype=np.int32)


def _time_best(fn, codes: np.ndarray, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(codes)
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="LCE-table kernel benchmark")
    parser.add_argument("--sizes", default="256,1024,4096")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    sizes = [int(s) for s in args.sizes.split(",") if s]
    rng = random.Random(args.seed)
    have_numba = True
    try:
        kernels.lce_table_numba(_random_codes(8, rng))  # warmup: JIT compile
    except RuntimeError:
        have_numba = False
        print("numba not installed; benchmarking the numpy kernel only")

    header = f"{'n':>8}  {'numpy':>12}" + (f"  {'numba':>12}  {'speedup':>8}" if have_numba else "")
    print(header)
    for n in sizes:
        codes = _random_codes(n, rng)
        t_np = _time_best(kernels.lce_table_numpy, codes, args.repeat)
        line = f"{n:>8}  {t_np * 1000:>10.2f}ms"
        if have_numba:
            t_nb = _time_best(kernels.lce_table_numba, codes, args.repeat)
            line += f"  {t_nb * 1000:>10.2f}ms  {t_np / t_nb:>7.2f}x"
        # sanity: both kernels must agree exactly
        if have_numba and not np.array_equal(
            kernels.lce_table_numpy(codes), kernels.lce_table_numba(codes)
        ):
            raise AssertionError(f"kernel outputs differ at n={n}")
        print(line)
    print(f"active kernel: {kernels.active_kernel()}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
