"""Per-evaluation hot kernels.

Every kernel exists twice: an explicit loop compiled with numba, and a
vectorised numpy version.  ``USE_NUMBA`` (see ``_jit``) picks which one the
public names bind to.  Both variants consume random numbers in the same
order, so the influence simulation gives identical results either way.

Bitstrings are ``uint8`` arrays throughout.
"""

import numpy as np

from ._jit import USE_NUMBA, njit


# --- loop variants (numba) -------------------------------------------------

def _weighted_sum_loop(weights, x):
    total = 0.0
    for i in range(x.shape[0]):
        if x[i]:
            total += weights[i]
    return total


def _coverage_loop(x, indptr, indices):
    n = x.shape[0]
    covered = np.zeros(n, dtype=np.bool_)
    count = 0
    for v in range(n):
        if not x[v]:
            continue
        if not covered[v]:
            covered[v] = True
            count += 1
        for j in range(indptr[v], indptr[v + 1]):
            u = indices[j]
            if not covered[u]:
                covered[u] = True
                count += 1
    return count


def _cut_loop(x, eu, ev, w):
    total = 0.0
    for e in range(eu.shape[0]):
        if x[eu[e]] != x[ev[e]]:
            total += w[e]
    return total


def _travel_time_loop(x, item_weight, city_end, distances, v_max, nu):
    carried = 0.0
    t = 0.0
    k = 0
    for i in range(distances.shape[0]):
        end = city_end[i]
        while k < end:
            if x[k]:
                carried += item_weight[k]
            k += 1
        t += distances[i] / (v_max - nu * carried)
    return t


def _ic_loop(seeds, indptr, dst, prob, n, count, rng):
    sizes = np.empty(count, dtype=np.int64)
    active = np.zeros(n, dtype=np.bool_)
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    for s in range(count):
        active[:] = False
        width = seeds.shape[0]
        for i in range(width):
            frontier[i] = seeds[i]
            active[seeds[i]] = True
        total = width
        while width > 0:
            k = 0
            for i in range(width):
                u = frontier[i]
                for e in range(indptr[u], indptr[u + 1]):
                    # one coin per out-arc, drawn even if the target is active
                    coin = rng.random()
                    v = dst[e]
                    if coin < prob[e] and not active[v]:
                        active[v] = True
                        nxt[k] = v
                        k += 1
            nxt[:k].sort()
            frontier[:k] = nxt[:k]
            width = k
            total += k
        sizes[s] = total
    return sizes


# --- vectorised variants (numpy) -------------------------------------------

def _weighted_sum_numpy(weights, x):
    return float(weights @ x)


def _coverage_numpy(x, indptr, indices):
    sel = x.astype(np.bool_)
    covered = sel.copy()
    covered[indices[np.repeat(sel, np.diff(indptr))]] = True
    return int(np.count_nonzero(covered))


def _cut_numpy(x, eu, ev, w):
    return float(w[x[eu] != x[ev]].sum())


def _travel_time_numpy(x, item_weight, city_end, distances, v_max, nu):
    prefix = np.concatenate(([0.0], np.cumsum(item_weight * x)))
    carried = prefix[city_end]
    return float(np.sum(distances / (v_max - nu * carried)))


def _ic_numpy(seeds, indptr, dst, prob, n, count, rng):
    sizes = np.empty(count, dtype=np.int64)
    out_deg = np.diff(indptr)
    for s in range(count):
        active = np.zeros(n, dtype=np.bool_)
        active[seeds] = True
        frontier = seeds
        total = len(seeds)
        while len(frontier):
            starts = indptr[frontier]
            lens = out_deg[frontier]
            # arc ids of the frontier, in frontier order then CSR order
            arcs = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(lens.sum())
            coins = rng.random(len(arcs))
            hit = dst[arcs[coins < prob[arcs]]]
            new = np.unique(hit[~active[hit]])
            active[new] = True
            frontier = new
            total += len(new)
        sizes[s] = total
    return sizes


NUMPY_KERNELS = {
    "weighted_sum": _weighted_sum_numpy,
    "coverage_count": _coverage_numpy,
    "cut_weight": _cut_numpy,
    "travel_time": _travel_time_numpy,
    "simulate_ic": _ic_numpy,
}

NUMBA_KERNELS = {
    "weighted_sum": njit(_weighted_sum_loop),
    "coverage_count": njit(_coverage_loop),
    "cut_weight": njit(_cut_loop),
    "travel_time": njit(_travel_time_loop),
    "simulate_ic": njit(_ic_loop),
}

ACTIVE = NUMBA_KERNELS if USE_NUMBA else NUMPY_KERNELS
BACKEND = "numba" if USE_NUMBA else "numpy"

weighted_sum = ACTIVE["weighted_sum"]
coverage_count = ACTIVE["coverage_count"]
cut_weight = ACTIVE["cut_weight"]
travel_time = ACTIVE["travel_time"]
simulate_ic_sizes = ACTIVE["simulate_ic"]
