#!/usr/bin/env python3
"""Time the compiled and numpy cost/gradient chains on random windows.

Usage:
  python benchmarks/bench_kernels.py [--repeats 20] [--sizes 6 8 12 16]

Each row is one window (ring coupling, 4 dense layers, 2 sweeps). Both paths
run on identical inputs and their outputs are checked against each other
before timing.
"""
import argparse
import time
import timeit

import numpy as np

from dsmswap import kernels
from dsmswap.circuit import LayeredCircuit, topology_ring
from dsmswap.coloring import partition_generators
from dsmswap.cost import CostContext


def window_args(m, T, sweeps, seed):
    r = np.random.default_rng(seed)
    layers = []
    for _ in range(T):
        p = r.permutation(m)
        layers.append([(int(p[2 * k]), int(p[2 * k + 1])) for k in range(m // 2)])
    top = topology_ring(m)
    ctx = CostContext(top, LayeredCircuit.from_layers(m, layers), partition_generators(top, sweeps))
    theta = r.uniform(-np.pi, np.pi, ctx.n_params)
    return kernels._prep(ctx.mc, ctx.gs, ctx.betas, ctx.schedule.pairs_array, theta)


def best_of(fn, repeats):
    # smallest per-call time over several batches
    timer = timeit.Timer(fn)
    n, _ = timer.autorange()
    return min(timer.repeat(repeat=repeats, number=n)) / n


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 8, 12, 16])
    ap.add_argument("--layers", type=int, default=4)
    ap.add_argument("--sweeps", type=int, default=2)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if kernels.numba_chain is None:
        print("numba unavailable or disabled; timing the numpy path only")
    else:
        t0 = time.perf_counter()
        kernels.numba_chain(*window_args(4, 1, 1, 0), True)
        print(f"numba warm-up (compile or cache load): {time.perf_counter() - t0:.2f}s")

    print(f"{'m':>4} {'params':>7} {'numpy [us]':>12} {'numba [us]':>12} {'speedup':>8}")
    for m in args.sizes:
        a = window_args(m, args.layers, args.sweeps, seed=m)
        t_np = best_of(lambda: kernels.numpy_chain(*a, True), args.repeats)
        row = f"{m:>4} {a[-1].size:>7} {t_np * 1e6:>12.1f}"
        if kernels.numba_chain is not None:
            ref = kernels.numpy_chain(*a, True)
            got = kernels.numba_chain(*a, True)
            assert all(np.allclose(x, y, atol=1e-10) for x, y in zip(ref, got)), "paths disagree"
            t_nb = best_of(lambda: kernels.numba_chain(*a, True), args.repeats)
            row += f" {t_nb * 1e6:>12.1f} {t_np / t_nb:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
