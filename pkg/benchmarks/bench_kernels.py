"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--grid 200]

Both paths are called in-process through their ``use_numba`` switch; the
first numba call (compilation or cache load) is excluded from the timings.
"""

import argparse
import time

import numpy as np

from strongfield._labeling import label_equal_rank
from strongfield.quadrature import integrate_moment


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def moments(use_numba):
    # the c_n tables behind the acceptance checks: plane, disc cut-off, monopole
    for n in range(33):
        integrate_moment(n, 1.0, use_numba=use_numba)
        integrate_moment(n, 10.0, 0.0, 1.0, use_numba=use_numba)
    for M in (4, 8, 16, 32):
        for n in range(M - 1):
            integrate_moment(n, 0.0, M + 1, use_numba=use_numba)


def make_ranks(cells, rng):
    # blobs of rank 2 on a rank-0 background with excluded specks
    g = np.linspace(-2, 2, cells)
    x, y = np.meshgrid(g, g, indexing="ij")
    field = np.sin(3 * x) * np.cos(2 * y) + 0.3 * rng.normal(size=x.shape)
    ranks = np.where(field > 0.2, 2, 0)
    ranks[rng.random(x.shape) < 0.01] = -1
    return ranks


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--grid", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    ranks2 = make_ranks(args.grid, np.random.default_rng(args.seed))
    ranks3 = np.stack([make_ranks(args.grid // 4, np.random.default_rng(args.seed + k))
                       for k in range(args.grid // 4)])
    assert np.array_equal(label_equal_rank(ranks2, True), label_equal_rank(ranks2, False))
    assert np.array_equal(label_equal_rank(ranks3, True), label_equal_rank(ranks3, False))
    moments(True)

    cases = [
        ("radial moments (c_n tables)", moments),
        (f"labeling {ranks2.shape}", lambda nb: label_equal_rank(ranks2, nb)),
        (f"labeling {ranks3.shape}", lambda nb: label_equal_rank(ranks3, nb)),
    ]
    print(f"{'kernel':34s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speed-up':>9s}")
    for name, fn in cases:
        t_nb = best_of(lambda: fn(True), args.repeat)
        t_np = best_of(lambda: fn(False), args.repeat)
        print(f"{name:34s} {1e3 * t_nb:11.2f} {1e3 * t_np:11.2f} {t_np / t_nb:9.1f}")


if __name__ == "__main__":
    main()
