"""Exact oracles for tiny instances: enumeration of all bitstrings, exact
influence spread over all live-arc worlds, submodularity and monotonicity
checks.

Subset index convention: bit ``i`` of the integer ``s`` is ``x_i``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .instances import DirectedGraph
from .problems import MaxCut, MaxInfluence, Problem

MAX_BRUTE_FORCE_DIMENSION = 20
MAX_EXACT_ARCS = 20
_WORLD_CHUNK = 1 << 12


class OracleTooLarge(ValueError):
    pass


def enumerate_bitstrings(n: int) -> np.ndarray:
    """All ``2**n`` bitstrings; row ``s`` is the binary expansion of ``s``."""
    if n > MAX_BRUTE_FORCE_DIMENSION:
        raise OracleTooLarge(f"dimension {n} exceeds {MAX_BRUTE_FORCE_DIMENSION}")
    s = np.arange(1 << n, dtype=np.int64)
    return ((s[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def _mask_dtype(n):
    return np.uint16 if n <= 16 else np.uint32


def _worlds(graph: DirectedGraph):
    """Yield ``(probability, reach)`` per chunk of live-arc worlds.

    ``reach[w, v]`` is the bitmask of nodes reachable from ``v`` in world
    ``w``; arc ``j`` is live in world ``w`` iff bit ``j`` of ``w`` is set.
    """
    m, n = graph.arc_count, graph.node_count
    if m > MAX_EXACT_ARCS:
        raise OracleTooLarge(f"{m} arcs exceed the exact-enumeration limit of {MAX_EXACT_ARCS}")
    if n > 32:
        raise OracleTooLarge("exact influence supports at most 32 nodes")
    dtype = _mask_dtype(n)
    p = graph.edge_prob
    total = 1 << m
    for start in range(0, total, _WORLD_CHUNK):
        w = np.arange(start, min(start + _WORLD_CHUNK, total), dtype=np.int64)
        live = ((w[:, None] >> np.arange(m)) & 1).astype(bool)
        prob = np.prod(np.where(live, p, 1.0 - p), axis=1)
        reach = np.tile((1 << np.arange(n)).astype(dtype), (len(w), 1))
        for _ in range(max(n - 1, 1)):
            before = reach.copy()
            for j in range(m):
                a, b = graph.src[j], graph.dst[j]
                has_a = ((reach >> dtype(a)) & dtype(1)).astype(bool) & live[:, j:j + 1]
                reach[has_a] |= dtype(1 << b)
            if np.array_equal(before, reach):
                break
        yield prob, reach


def exact_influence_expectation(graph, seed_set) -> float:
    """``E|IC(seed_set)|`` by summing over all ``2**arcs`` live-arc worlds."""
    if isinstance(graph, MaxInfluence):
        graph = graph.graph
    seeds = sorted(set(int(v) for v in seed_set))
    if not seeds:
        return 0.0
    total = 0.0
    for prob, reach in _worlds(graph):
        union = np.bitwise_or.reduce(reach[:, seeds], axis=1)
        total += float(prob @ np.bitwise_count(union))
    return total


def exact_influence_moments(graph, seed_set) -> tuple[float, float]:
    """Mean and variance of ``|IC(seed_set)|`` over all live-arc worlds."""
    if isinstance(graph, MaxInfluence):
        graph = graph.graph
    seeds = sorted(set(int(v) for v in seed_set))
    if not seeds:
        return 0.0, 0.0
    m1 = m2 = 0.0
    for prob, reach in _worlds(graph):
        size = np.bitwise_count(np.bitwise_or.reduce(reach[:, seeds], axis=1)).astype(float)
        m1 += float(prob @ size)
        m2 += float(prob @ size**2)
    return m1, max(m2 - m1 * m1, 0.0)


def influence_table(graph: DirectedGraph) -> np.ndarray:
    """Exact expected spread of every seed set, indexed by subset mask."""
    n = graph.node_count
    if n + graph.arc_count > 28:
        raise OracleTooLarge("2**(nodes + arcs) too large for the exact influence table")
    return _influence_table_cached(graph)


@lru_cache(maxsize=8)
def _influence_table_cached(graph: DirectedGraph) -> np.ndarray:
    n = graph.node_count
    size = 1 << n
    low = np.zeros(size, dtype=np.int64)
    s = np.arange(1, size)
    low[1:] = np.log2(s & -s).astype(np.int64)
    out = np.zeros(size)
    for prob, reach in _worlds(graph):
        union = np.zeros((size, len(prob)), dtype=reach.dtype)
        for idx in range(1, size):
            union[idx] = union[idx & (idx - 1)] | reach[:, low[idx]]
        out += np.bitwise_count(union) @ prob
    out.setflags(write=False)
    return out


def objective_table(problem: Problem) -> np.ndarray:
    """Raw (unpenalised) objective of every subset."""
    return problem.objective_batch(enumerate_bitstrings(problem.dimension))


def fitness_table(problem: Problem) -> np.ndarray:
    """Penalised fitness of every subset (influence computed exactly)."""
    return problem.fitness_batch(enumerate_bitstrings(problem.dimension))


def feasible_mask(problem: Problem) -> np.ndarray:
    X = enumerate_bitstrings(problem.dimension)
    if isinstance(problem, MaxCut):
        return np.ones(len(X), dtype=bool)
    from .constraints import cost_batch

    return cost_batch(problem.cost_model, X) <= problem.budget


def brute_force_optimum(problem: Problem) -> tuple[np.ndarray, float]:
    """Best feasible point by full enumeration (first maximiser on ties)."""
    n = problem.dimension
    if n > MAX_BRUTE_FORCE_DIMENSION:
        raise OracleTooLarge(f"dimension {n} exceeds {MAX_BRUTE_FORCE_DIMENSION}")
    values = np.where(feasible_mask(problem), fitness_table(problem), -np.inf)
    best = int(np.argmax(values))
    x = ((best >> np.arange(n)) & 1).astype(np.uint8)
    return x, float(values[best])


# --- set-function properties ------------------------------------------------

@lru_cache(maxsize=None)
def _nested_pairs(n: int):
    """All pairs ``(S, T)`` of subset masks with ``S`` a subset of ``T``."""
    ts, ss = [], []
    for t in range(1 << n):
        s = t
        while True:
            ts.append(t)
            ss.append(s)
            if s == 0:
                break
            s = (s - 1) & t
    return np.array(ss, dtype=np.int64), np.array(ts, dtype=np.int64)


def submodularity_violations(table, n: int, tol: float = 1e-9, exhaustive: bool = True) -> int:
    """Number of violated diminishing-returns inequalities.

    ``exhaustive`` checks ``f(S+v) - f(S) >= f(T+v) - f(T)`` for every
    ``S <= T`` and ``v`` outside ``T`` (``3**n * n`` cases, n <= 12).
    Otherwise the equivalent local form
    ``f(S+u) + f(S+v) >= f(S+u+v) + f(S)`` is checked, which scales to n = 20.
    """
    f = np.asarray(table, dtype=float)
    bad = 0
    if exhaustive:
        if n > 12:
            raise OracleTooLarge("exhaustive submodularity check limited to n <= 12")
        S, T = _nested_pairs(n)
        for v in range(n):
            bit = 1 << v
            keep = (T & bit) == 0
            s, t = S[keep], T[keep]
            gain_s = f[s | bit] - f[s]
            gain_t = f[t | bit] - f[t]
            bad += int(np.count_nonzero(gain_s < gain_t - tol))
        return bad
    masks = np.arange(1 << n, dtype=np.int64)
    for u in range(n):
        for v in range(u + 1, n):
            bu, bv = 1 << u, 1 << v
            s = masks[(masks & (bu | bv)) == 0]
            lhs = f[s | bu] + f[s | bv]
            rhs = f[s | bu | bv] + f[s]
            bad += int(np.count_nonzero(lhs < rhs - tol))
    return bad


def monotonicity_violations(table, n: int, tol: float = 1e-9) -> int:
    f = np.asarray(table, dtype=float)
    masks = np.arange(1 << n, dtype=np.int64)
    bad = 0
    for v in range(n):
        bit = 1 << v
        s = masks[(masks & bit) == 0]
        bad += int(np.count_nonzero(f[s | bit] < f[s] - tol))
    return bad


def is_submodular(table, n: int, tol: float = 1e-9) -> bool:
    return submodularity_violations(table, n, tol, exhaustive=n <= 8) == 0


def is_monotone(table, n: int, tol: float = 1e-9) -> bool:
    return monotonicity_violations(table, n, tol) == 0
