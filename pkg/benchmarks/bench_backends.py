#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three dual-implementation hot kernels on workloads shaped like
the scaling experiments: counter-based uniform generation, sample-moment
accumulation, and the Isserlis pairing sum.

    python benchmarks/bench_backends.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from gmoments import _kernels_numba as kb
from gmoments import _kernels_numpy as kn
from gmoments.pairings import pairings_array
from gmoments.rng import key_schedule, normal_rows


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(name, make_args, run, repeats):
    args = make_args()
    run(kb, *args)  # jit warmup
    t_nb = best_of(lambda: run(kb, *args), repeats)
    t_np = best_of(lambda: run(kn, *args), repeats)
    ratio = t_np / t_nb
    print(f"{name:<42} numba {t_nb * 1e3:9.2f} ms   numpy {t_np * 1e3:9.2f} ms"
          f"   numpy/numba {ratio:5.2f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    r = args.repeats

    ks = key_schedule(42)
    bench("philox uniforms 1e6 x 16",
          lambda: (ks, 0, 10**6, 8, 0),
          lambda mod, *a: mod.philox_uniforms(*a), r)

    x16 = normal_rows(1, 8192, 16)
    sym = (np.zeros(4, dtype=np.int64), np.full(4, 16, dtype=np.int64))
    bench("sample moment d=16 p=4 N=8192",
          lambda: (x16, *sym),
          lambda mod, *a: mod.sample_moment_flat(*a), r)

    x3 = normal_rows(2, 10**5, 3)
    sym6 = (np.zeros(6, dtype=np.int64), np.full(6, 3, dtype=np.int64))
    bench("sample moment + sq d=3 p=6 N=1e5",
          lambda: (x3, *sym6),
          lambda mod, *a: mod.sample_moment_flat_with_sq(*a), r)

    sigma8 = np.eye(8) + 0.1
    pack4 = np.zeros((4, 4, 8, 8))
    for j in range(4):
        for k in range(j + 1, 4):
            pack4[j, k] = sigma8
    bench("isserlis d=8 p=4",
          lambda: (pack4, np.full(4, 8, dtype=np.int64), pairings_array(4)),
          lambda mod, *a: mod.isserlis_flat(*a), r)

    sigma3 = np.eye(3) + 0.2
    pack6 = np.zeros((6, 6, 3, 3))
    for j in range(6):
        for k in range(j + 1, 6):
            pack6[j, k] = sigma3
    bench("isserlis d=3 p=6",
          lambda: (pack6, np.full(6, 3, dtype=np.int64), pairings_array(6)),
          lambda mod, *a: mod.isserlis_flat(*a), r)


if __name__ == "__main__":
    main()
