"""Time the numba kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from fairgraph import kernels


def cases():
    rng = np.random.default_rng(0)
    revenue = rng.random((40, 3))
    targets, weights = np.array([0.3, 0.6, 0.1]), np.full(3, 0.1)
    short = revenue[:8]
    masks = rng.integers(0, 2**16, size=16).astype(np.int64) & ~(1 << np.arange(16))
    cover = (rng.random((4, 4)) < 0.4) | np.eye(4, dtype=bool)
    cover = cover.astype(np.int64)
    return {
        "mas, 16 actions": (kernels.mas_size_nb, kernels.mas_size_np, (masks,)),
        "grid LP oracle, I=4, 1/200": (kernels.grid_maxmin_nb, kernels.grid_maxmin_np, (cover, 200)),
        "dynamic programme, T=40": (kernels.dp_tables_nb, kernels.dp_tables_np, (revenue, targets, weights, 3)),
        "exhaustive search, T=8": (kernels.exhaustive_nb, kernels.exhaustive_np, (short, targets, weights, 3)),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    print(f"{'kernel':<30}{'numba (s)':>12}{'numpy (s)':>12}{'speed-up':>10}")
    for name, (fast, slow, call_args) in cases().items():
        fast(*call_args)  # compile outside the timing
        t_fast = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        print(f"{name:<30}{t_fast:>12.4f}{t_slow:>12.4f}{t_slow / t_fast:>9.1f}x")


if __name__ == "__main__":
    main()
