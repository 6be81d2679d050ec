"""Time the numba kernels against their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--n 1000] [--repeat 200]

Prints one line per kernel: per-call time for each backend and the speed-up.
Compile time is excluded (every kernel is called once before timing).
"""

import argparse
import timeit

import numpy as np

from submodbench import kernels
from submodbench.instances import TTPInstance, random_digraph, random_graph


def cases(n, rng):
    g = random_graph(n, 10 / n, rng)
    d = random_digraph(n, 5 * n, rng)
    items = 4 * n
    ttp = TTPInstance(
        distances=rng.integers(1, 100, n).astype(float),
        item_profit=rng.integers(1, 100, items).astype(float),
        item_weight=rng.integers(1, 100, items).astype(float),
        item_city=np.sort(rng.integers(1, n, items)),
        v_min=0.1, v_max=1.0, capacity=50.0 * items, rent=1.0,
    )
    x = rng.integers(0, 2, n, dtype=np.uint8)
    xi = rng.integers(0, 2, items, dtype=np.uint8)
    eu, ev = np.ascontiguousarray(g.edges[:, 0]), np.ascontiguousarray(g.edges[:, 1])
    seeds = np.flatnonzero(rng.random(n) < 0.01).astype(np.int64)
    return {
        "weighted_sum": lambda k: k(g.degree.astype(float), x),
        "coverage_count": lambda k: k(x, g.indptr, g.indices),
        "cut_weight": lambda k: k(x, eu, ev, g.weights),
        "travel_time": lambda k: k(xi, ttp.item_weight, ttp.city_end, ttp.distances, ttp.v_max, ttp.nu),
        "simulate_ic": lambda k: k(seeds, d.indptr, d.dst, d.edge_prob, n, 10, np.random.default_rng(0)),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--n", type=int, default=1000, help="instance size")
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()
    if not kernels.NUMBA_KERNELS:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(1)
    print(f"{'kernel':<16}{'numba [us]':>12}{'numpy [us]':>12}{'speed-up':>10}")
    for name, call in cases(args.n, rng).items():
        fast, slow = kernels.NUMBA_KERNELS[name], kernels.NUMPY_KERNELS[name]
        call(fast)  # compile
        t_fast = min(timeit.repeat(lambda: call(fast), number=args.repeat, repeat=3)) / args.repeat
        t_slow = min(timeit.repeat(lambda: call(slow), number=args.repeat, repeat=3)) / args.repeat
        print(f"{name:<16}{t_fast * 1e6:>12.2f}{t_slow * 1e6:>12.2f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
