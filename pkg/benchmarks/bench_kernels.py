"""Time the order-filtering kernels with and without numba.

    python3 benchmarks/bench_kernels.py --n 7 --constraints 20 --repeat 5
"""

import argparse
import timeit

import numpy as np

from justify import _kernels as K


def workload(n, n_constraints, seed):
    rng = np.random.default_rng(seed)
    ranks = K.permutation_ranks(n)
    full = (1 << n) - 1
    excluded = rng.integers(0, n, size=n_constraints)
    # nonempty menus that leave out the excluded item
    menus = np.array([int(rng.integers(1, full + 1)) & ~(1 << int(x)) or (full & ~(1 << int(x))) for x in excluded])
    all_menus = np.arange(1, full + 1)
    return ranks, menus, excluded, all_menus


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=7)
    ap.add_argument("--constraints", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ranks, menus, excluded, all_menus = workload(args.n, args.constraints, args.seed)
    top_np = K.top_bits(ranks, all_menus, use_numba=False)
    # the constraint filter often keeps nothing; union over a random half instead
    half = np.random.default_rng(args.seed).random(ranks.shape[0]) < 0.5
    cases = {
        "consistent_mask": lambda u: K.consistent_mask(ranks, menus, excluded, use_numba=u),
        "top_bits": lambda u: K.top_bits(ranks, all_menus, use_numba=u),
        "union_bits": lambda u: K.union_bits(top_np, half, use_numba=u),
    }
    print(f"n={args.n} orders={ranks.shape[0]} menus={all_menus.size} constraints={menus.size} numba={K.HAS_NUMBA}")
    print(f"{'kernel':<16}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, fn in cases.items():
        if K.HAS_NUMBA:
            assert np.array_equal(fn(True), fn(False)), name  # warm-up compiles, and both paths must agree
        t_np = min(timeit.repeat(lambda fn=fn: fn(False), number=1, repeat=args.repeat)) * 1e3
        if K.HAS_NUMBA:
            t_nb = min(timeit.repeat(lambda fn=fn: fn(True), number=1, repeat=args.repeat)) * 1e3
            print(f"{name:<16}{t_np:>12.2f}{t_nb:>12.2f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<16}{t_np:>12.2f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
