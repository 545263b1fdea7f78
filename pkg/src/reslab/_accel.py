"""Hot numeric kernels: numba-jitted versions with pure-numpy fallbacks.

Every public function here has two implementations with identical semantics.
The jitted path is used unless the environment variable RESLAB_NO_NUMBA is
set to a truthy value (or numba is unavailable).  Results are bit-identical
between the two paths for the integer kernels and agree to rounding for the
float kernels; the benchmark in benchmarks/bench_kernels.py compares them.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("RESLAB_NO_NUMBA", "0").strip().lower()
USE_NUMBA = _FLAG not in ("1", "true", "yes", "on")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

__all__ = [
    "USE_NUMBA",
    "word_products",
    "word_products_int",
    "cheeger_exhaustive",
    "conjugacy_partition_mod_p",
]


# ---------------------------------------------------------------------------
# 2x2 matrix products along words

def _word_products_np(gens: np.ndarray, words: np.ndarray) -> np.ndarray:
    """Compose generator matrices along each word (vectorized over words).

    gens: (2m, 2, 2) float64, words: (nw, n) int64 with 0-based letters.
    Returns (nw, 2, 2) float64 products gens[w0] @ gens[w1] @ ... @ gens[wn-1].
    """
    out = gens[words[:, 0]].copy()
    for t in range(1, words.shape[1]):
        out = np.einsum("kij,kjl->kil", out, gens[words[:, t]])
    return out


def _word_products_int_np(gens: np.ndarray, words: np.ndarray) -> np.ndarray:
    out = gens[words[:, 0]].astype(np.int64)
    for t in range(1, words.shape[1]):
        out = np.einsum("kij,kjl->kil", out, gens[words[:, t]].astype(np.int64))
    return out


if USE_NUMBA:

    @njit(cache=True)
    def _word_products_nb(gens, words):  # pragma: no cover - jitted
        nw, n = words.shape
        out = np.empty((nw, 2, 2), dtype=np.float64)
        for k in range(nw):
            a, b = gens[words[k, 0], 0, 0], gens[words[k, 0], 0, 1]
            c, d = gens[words[k, 0], 1, 0], gens[words[k, 0], 1, 1]
            for t in range(1, n):
                g = gens[words[k, t]]
                a, b, c, d = (
                    a * g[0, 0] + b * g[1, 0],
                    a * g[0, 1] + b * g[1, 1],
                    c * g[0, 0] + d * g[1, 0],
                    c * g[0, 1] + d * g[1, 1],
                )
            out[k, 0, 0], out[k, 0, 1] = a, b
            out[k, 1, 0], out[k, 1, 1] = c, d
        return out

    @njit(cache=True)
    def _word_products_int_nb(gens, words):  # pragma: no cover - jitted
        nw, n = words.shape
        out = np.empty((nw, 2, 2), dtype=np.int64)
        for k in range(nw):
            a, b = gens[words[k, 0], 0, 0], gens[words[k, 0], 0, 1]
            c, d = gens[words[k, 0], 1, 0], gens[words[k, 0], 1, 1]
            for t in range(1, n):
                g = gens[words[k, t]]
                a, b, c, d = (
                    a * g[0, 0] + b * g[1, 0],
                    a * g[0, 1] + b * g[1, 1],
                    c * g[0, 0] + d * g[1, 0],
                    c * g[0, 1] + d * g[1, 1],
                )
            out[k, 0, 0], out[k, 0, 1] = a, b
            out[k, 1, 0], out[k, 1, 1] = c, d
        return out


def word_products(gens: np.ndarray, words: np.ndarray) -> np.ndarray:
    gens = np.ascontiguousarray(gens, dtype=np.float64)
    words = np.ascontiguousarray(words, dtype=np.int64)
    if words.size == 0:
        return np.empty((0, 2, 2))
    if USE_NUMBA:
        return _word_products_nb(gens, words)
    return _word_products_np(gens, words)


def word_products_int(gens: np.ndarray, words: np.ndarray) -> np.ndarray:
    """Exact int64 products; caller is responsible for overflow headroom."""
    gens = np.ascontiguousarray(gens, dtype=np.int64)
    words = np.ascontiguousarray(words, dtype=np.int64)
    if words.size == 0:
        return np.empty((0, 2, 2), dtype=np.int64)
    if USE_NUMBA:
        return _word_products_int_nb(gens, words)
    return _word_products_int_np(gens, words)


# ---------------------------------------------------------------------------
# Exhaustive Cheeger constant

def _cheeger_np(adj: np.ndarray) -> float:
    n = adj.shape[0]
    deg = adj.sum(axis=1)
    best = np.inf
    chunk = 1 << 16
    total = 1 << n
    bits = np.arange(n)
    for start in range(1, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        ind = ((masks[:, None] >> bits[None, :]) & 1).astype(np.float64)
        sizes = ind.sum(axis=1)
        ok = (sizes >= 1) & (2 * sizes <= n)
        if not ok.any():
            continue
        ind = ind[ok]
        sizes = sizes[ok]
        inner = np.einsum("ci,ij,cj->c", ind, adj, ind)
        cut = ind @ deg - inner
        best = min(best, float(np.min(cut / sizes)))
    return best


if USE_NUMBA:

    @njit(cache=True)
    def _cheeger_nb(adj):  # pragma: no cover - jitted
        n = adj.shape[0]
        deg = np.zeros(n)
        for i in range(n):
            for j in range(n):
                deg[i] += adj[i, j]
        best = 1e300
        total = 1 << n
        for mask in range(1, total):
            size = 0
            for i in range(n):
                if (mask >> i) & 1:
                    size += 1
            if 2 * size > n:
                continue
            cut = 0.0
            for i in range(n):
                if (mask >> i) & 1:
                    cut += deg[i]
                    for j in range(n):
                        if (mask >> j) & 1:
                            cut -= adj[i, j]
            ratio = cut / size
            if ratio < best:
                best = ratio
        return best


def cheeger_exhaustive(adj: np.ndarray) -> float:
    """Exact min over nonempty subsets A, |A| <= n/2, of |boundary(A)|/|A|.

    adj is the symmetric edge-multiplicity matrix (no diagonal loops counted).
    """
    adj = np.ascontiguousarray(adj, dtype=np.float64)
    if USE_NUMBA:
        return float(_cheeger_nb(adj))
    return _cheeger_np(adj)


# ---------------------------------------------------------------------------
# Brute-force conjugacy partition in SL2(F_p)

def _conj_partition_np(elems: np.ndarray, p: int) -> np.ndarray:
    n = elems.shape[0]
    key = ((elems[:, 0] * p + elems[:, 1]) * p + elems[:, 2]) * p + elems[:, 3]
    order = np.argsort(key, kind="stable")
    lookup = dict(zip(key[order].tolist(), order.tolist()))
    a, b, c, d = (elems[:, i] for i in range(4))
    # inverses: [[d, -b], [-c, a]] mod p
    ia, ib, ic, id_ = d, (-b) % p, (-c) % p, a
    labels = np.full(n, -1, dtype=np.int64)
    nxt = 0
    for x in range(n):
        if labels[x] >= 0:
            continue
        xa, xb, xc, xd = (int(elems[x, i]) for i in range(4))
        # orbit of x under conjugation by every g: g x g^-1
        ga, gb, gc, gd = a, b, c, d
        ya = (ga * xa + gb * xc) % p
        yb = (ga * xb + gb * xd) % p
        yc = (gc * xa + gd * xc) % p
        yd = (gc * xb + gd * xd) % p
        za = (ya * ia + yb * ic) % p
        zb = (ya * ib + yb * id_) % p
        zc = (yc * ia + yd * ic) % p
        zd = (yc * ib + yd * id_) % p
        zkey = ((za * p + zb) * p + zc) * p + zd
        for kk in np.unique(zkey):
            labels[lookup[int(kk)]] = nxt
        nxt += 1
    return labels


if USE_NUMBA:

    @njit(cache=True)
    def _conj_partition_nb(elems, p):  # pragma: no cover - jitted
        n = elems.shape[0]
        p3 = p * p * p
        lookup = np.full(p3 * p, -1, dtype=np.int64)
        for i in range(n):
            k = ((elems[i, 0] * p + elems[i, 1]) * p + elems[i, 2]) * p + elems[i, 3]
            lookup[k] = i
        labels = np.full(n, -1, dtype=np.int64)
        nxt = 0
        for x in range(n):
            if labels[x] >= 0:
                continue
            xa, xb, xc, xd = elems[x, 0], elems[x, 1], elems[x, 2], elems[x, 3]
            for g in range(n):
                ga, gb, gc, gd = elems[g, 0], elems[g, 1], elems[g, 2], elems[g, 3]
                ia, ib, ic, id_ = gd, (-gb) % p, (-gc) % p, ga
                ya = (ga * xa + gb * xc) % p
                yb = (ga * xb + gb * xd) % p
                yc = (gc * xa + gd * xc) % p
                yd = (gc * xb + gd * xd) % p
                za = (ya * ia + yb * ic) % p
                zb = (ya * ib + yb * id_) % p
                zc = (yc * ia + yd * ic) % p
                zd = (yc * ib + yd * id_) % p
                k = ((za * p + zb) * p + zc) * p + zd
                labels[lookup[k]] = nxt
            nxt += 1
        return labels


def conjugacy_partition_mod_p(elems: np.ndarray, p: int) -> np.ndarray:
    """Partition the listed SL2(F_p) elements into conjugacy orbits.

    elems: (n, 4) int64 rows (a, b, c, d) with entries in [0, p).  Returns an
    int64 label per element; equal label means conjugate in SL2(F_p).
    """
    elems = np.ascontiguousarray(elems, dtype=np.int64)
    if USE_NUMBA:
        return _conj_partition_nb(elems, p)
    return _conj_partition_np(elems, p)
