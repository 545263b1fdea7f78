#!/usr/bin/env python3
"""Benchmark the jitted kernels against their pure-numpy fallbacks.

Both implementations live in reslab._accel; the fallback is what runs when
RESLAB_NO_NUMBA is set. Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from reslab import _accel
from reslab import schottky as sk


def timed(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_word_products(repeat):
    data = sk.preset("sl2z-crossed")
    words = sk.words_array(data.m, 6)
    gens = data.gens_array()
    gens_int = data.gens_array_int()
    rows = []
    if _accel.USE_NUMBA:
        _accel.word_products(gens, words[:1])  # warm the jit cache
        t_nb, r_nb = timed(_accel.word_products, gens, words, repeat=repeat)
        t_np, r_np = timed(_accel._word_products_np, gens, words, repeat=repeat)
        assert np.allclose(r_nb, r_np)
        rows.append(("word_products", words.shape[0], t_nb, t_np))
        _accel.word_products_int(gens_int, words[:1])
        t_nb, r_nb = timed(_accel.word_products_int, gens_int, words, repeat=repeat)
        t_np, r_np = timed(_accel._word_products_int_np, gens_int, words,
                           repeat=repeat)
        assert np.array_equal(r_nb, r_np)
        rows.append(("word_products_int", words.shape[0], t_nb, t_np))
    else:
        t_np, _ = timed(_accel.word_products, gens, words, repeat=repeat)
        rows.append(("word_products", words.shape[0], None, t_np))
        t_np, _ = timed(_accel.word_products_int, gens_int, words, repeat=repeat)
        rows.append(("word_products_int", words.shape[0], None, t_np))
    return rows


def bench_cheeger(repeat):
    from reslab import cayley
    graph = cayley.cycle_graph(20)
    adj = cayley.adjacency_matrix(graph)
    if _accel.USE_NUMBA:
        _accel.cheeger_exhaustive(adj[:6, :6])
        t_nb, r_nb = timed(_accel.cheeger_exhaustive, adj, repeat=repeat)
        t_np, r_np = timed(_accel._cheeger_np, adj, repeat=repeat)
        assert abs(r_nb - r_np) < 1e-12
        return [("cheeger_exhaustive", adj.shape[0], t_nb, t_np)]
    t_np, _ = timed(_accel.cheeger_exhaustive, adj, repeat=repeat)
    return [("cheeger_exhaustive", adj.shape[0], None, t_np)]


def bench_conjugacy(repeat):
    from reslab import congruence
    p = 13
    elems = congruence.all_elements(p)
    if _accel.USE_NUMBA:
        small = congruence.all_elements(5)
        _accel.conjugacy_partition_mod_p(small, 5)
        t_nb, r_nb = timed(_accel.conjugacy_partition_mod_p, elems, p,
                           repeat=repeat)
        t_np, r_np = timed(_accel._conj_partition_np, elems, p, repeat=repeat)
        assert np.array_equal(r_nb, r_np)
        return [("conjugacy_partition", elems.shape[0], t_nb, t_np)]
    t_np, _ = timed(_accel.conjugacy_partition_mod_p, elems, p, repeat=repeat)
    return [("conjugacy_partition", elems.shape[0], None, t_np)]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    print(f"numba path active: {_accel.USE_NUMBA}")
    print(f"{'kernel':24s} {'size':>8s} {'numba (s)':>12s} {'numpy (s)':>12s} "
          f"{'speedup':>8s}")
    rows = []
    rows += bench_word_products(args.repeat)
    rows += bench_cheeger(args.repeat)
    rows += bench_conjugacy(args.repeat)
    for name, size, t_nb, t_np in rows:
        if t_nb is None:
            print(f"{name:24s} {size:8d} {'-':>12s} {t_np:12.6f} {'-':>8s}")
        else:
            print(f"{name:24s} {size:8d} {t_nb:12.6f} {t_np:12.6f} "
                  f"{t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
