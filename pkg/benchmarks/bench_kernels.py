"""Time the compiled kernels against the NumPy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 20]

Prints one line per kernel with the median time of each backend and the
speed-up. Workload sizes match what one NSMA/selection call sees: a
population of 200 objective pairs, the direction LP at n = 100, and k-means
on 100 points in 100 dimensions.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from paretobo.kernels import available_backends


def _lp_tableau(rng, n=100):
    from paretobo.moo import lp

    G = rng.normal(size=(2, n))
    G /= np.abs(G).max()
    A = np.zeros((2 + n, n + 1))
    A[:2, :n] = G
    A[:2, n] = 1.0
    A[2:, :n] = np.eye(n)
    b = np.concatenate([G.sum(axis=1), np.full(n, 2.0)])
    c = np.zeros(n + 1)
    c[n] = -1.0
    return lp, c, A, b


def workloads(rng):
    F = rng.random((200, 2))
    X = rng.random((100, 100))
    w = np.ones(100)
    C0 = X[:3].copy()
    lpmod, c, A, b = _lp_tableau(rng)

    def simplex(mod):
        # solve_lp reads the pivot routine from paretobo.kernels; swap it in
        import paretobo.kernels as K
        old = K.simplex_pivots
        K.simplex_pivots = mod.simplex_pivots
        try:
            lpmod.solve_lp(c, A, b)
        finally:
            K.simplex_pivots = old

    return {
        "nondominated_ranks (200x2)": lambda m: m.nondominated_ranks(F),
        "crowding_distance (200x2)": lambda m: m.crowding_distance(F),
        "simplex LP (n=100)": simplex,
        "lloyd (100x100, k=3)": lambda m: m.lloyd(X, w, C0.copy(), 300, 1e-9),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the NumPy backend only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<30}" + "".join(f"{b:>12}" for b in backends) + f"{'speed-up':>10}")
    for name, fn in workloads(rng).items():
        times = {}
        for b, mod in backends.items():
            fn(mod)  # warm-up
            t = timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)
            times[b] = float(np.median(t))
        line = f"{name:<30}" + "".join(f"{times[b] * 1e3:>10.3f}ms" for b in backends)
        if "cython" in times:
            line += f"{times['python'] / times['cython']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
