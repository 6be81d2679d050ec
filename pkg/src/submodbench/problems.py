"""The four benchmark problems and their penalised fitness ``f'``.

Every problem exposes ``evaluate(x, rng=None) -> Evaluation`` plus a
faster ``fitness(x, rng=None) -> float`` used inside the search loops, and
``fitness_batch(X)`` (numpy only) used by the exact oracles.

Constrained problems penalise an infeasible ``x`` by
``-w * (c(x) - B) ** a``; the default ``w = a = 1`` gives ``B - c(x)``.
Packing while travelling additionally subtracts ``R * T(v_min)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .constraints import CostModel, cost, cost_batch
from .instances import DirectedGraph, TTPInstance, UndirectedGraph

DEFAULT_SIMULATIONS = 100

# problem-id ranges, one block per problem kind
PID_BASE = {"max-cut": 2000, "max-coverage": 2100, "max-influence": 2200, "pwt": 2300}


@dataclass(frozen=True)
class Evaluation:
    fitness: float
    cost: float
    feasible: bool


def as_bits(x) -> np.ndarray:
    """Coerce ``x`` to a contiguous 0/1 ``uint8`` array."""
    a = np.ascontiguousarray(x, dtype=np.uint8)
    if a.ndim != 1 or np.any(a > 1):
        raise ValueError("bitstring must be a 1-d array of zeros and ones")
    return a


class Problem:
    kind: str = ""
    name: str = ""
    dimension: int
    pid: int
    instance_id: int

    def evaluate(self, x, rng=None) -> Evaluation:
        raise NotImplementedError

    def fitness(self, x, rng=None) -> float:
        return self.evaluate(x, rng).fitness

    def _check_len(self, x):
        if len(x) != self.dimension:
            raise ValueError(f"bitstring length {len(x)} != dimension {self.dimension}")

    def __repr__(self):
        return f"{type(self).__name__}(pid={self.pid}, n={self.dimension}, instance={self.instance_id})"


class _Constrained(Problem):
    def __init__(self, cost_model: CostModel, penalty_weight=1.0, penalty_exponent=1.0):
        if cost_model.dimension != self.dimension:
            raise ValueError(f"cost model has dimension {cost_model.dimension}, problem {self.dimension}")
        self.cost_model = cost_model
        self.budget = cost_model.budget
        self.penalty_weight = float(penalty_weight)
        self.penalty_exponent = float(penalty_exponent)

    def penalty(self, c: float) -> float:
        excess = c - self.budget
        if self.penalty_weight == 1.0 and self.penalty_exponent == 1.0:
            return self.budget - c
        return -self.penalty_weight * excess**self.penalty_exponent

    def _penalty_batch(self, c):
        excess = np.maximum(c - self.budget, 0.0)
        if self.penalty_weight == 1.0 and self.penalty_exponent == 1.0:
            return self.budget - c
        return -self.penalty_weight * excess**self.penalty_exponent


class MaxCoverage(_Constrained):
    """``f(x)`` = size of the closed neighbourhood of the selected nodes."""

    kind = "max-coverage"
    name = "MaxCoverage"

    def __init__(self, graph: UndirectedGraph, cost_model: CostModel, pid=None, instance_id=1, **penalty):
        self.graph = graph
        self.dimension = graph.node_count
        self.pid = PID_BASE[self.kind] if pid is None else pid
        self.instance_id = instance_id
        super().__init__(cost_model, **penalty)

    def objective(self, x) -> float:
        return float(kernels.coverage_count(x, self.graph.indptr, self.graph.indices))

    def fitness(self, x, rng=None) -> float:
        c = cost(self.cost_model, x)
        if c <= self.budget:
            return float(kernels.coverage_count(x, self.graph.indptr, self.graph.indices))
        return self.penalty(c)

    def evaluate(self, x, rng=None) -> Evaluation:
        x = as_bits(x)
        self._check_len(x)
        c = cost(self.cost_model, x)
        feasible = c <= self.budget
        f = self.objective(x) if feasible else self.penalty(c)
        return Evaluation(f, c, bool(feasible))

    def objective_batch(self, X) -> np.ndarray:
        n = self.dimension
        closed = np.eye(n, dtype=np.int32)
        closed[self.graph.edges[:, 0], self.graph.edges[:, 1]] = 1
        closed[self.graph.edges[:, 1], self.graph.edges[:, 0]] = 1
        return ((np.asarray(X, dtype=np.int32) @ closed) > 0).sum(axis=1).astype(float)

    def fitness_batch(self, X) -> np.ndarray:
        c = cost_batch(self.cost_model, X)
        return np.where(c <= self.budget, self.objective_batch(X), self._penalty_batch(c))


class MaxInfluence(_Constrained):
    """Expected independent-cascade spread, estimated by Monte Carlo.

    One call to ``fitness`` is one fitness evaluation whatever
    ``simulation_count`` is.  When no ``rng`` is passed a fresh generator
    seeded with ``simulation_seed`` is used, so such calls are repeatable.
    Infeasible points are not simulated.
    """

    kind = "max-influence"
    name = "MaxInfluence"

    def __init__(
        self,
        graph: DirectedGraph,
        cost_model: CostModel,
        simulation_count: int = DEFAULT_SIMULATIONS,
        simulation_seed: int = 0,
        pid=None,
        instance_id=1,
        **penalty,
    ):
        if simulation_count < 1:
            raise ValueError("simulation_count must be at least 1")
        self.graph = graph
        self.dimension = graph.node_count
        self.simulation_count = int(simulation_count)
        self.simulation_seed = simulation_seed
        self.pid = PID_BASE[self.kind] if pid is None else pid
        self.instance_id = instance_id
        super().__init__(cost_model, **penalty)

    def spread_samples(self, x, count: int, rng) -> np.ndarray:
        seeds = np.flatnonzero(x).astype(np.int64)
        g = self.graph
        return kernels.simulate_ic_sizes(seeds, g.indptr, g.dst, g.edge_prob, g.node_count, count, rng)

    def objective(self, x, rng=None) -> float:
        if rng is None:
            rng = np.random.default_rng(self.simulation_seed)
        return float(self.spread_samples(x, self.simulation_count, rng).mean())

    def fitness(self, x, rng=None) -> float:
        c = cost(self.cost_model, x)
        if c <= self.budget:
            return self.objective(x, rng)
        return self.penalty(c)

    def evaluate(self, x, rng=None) -> Evaluation:
        x = as_bits(x)
        self._check_len(x)
        c = cost(self.cost_model, x)
        feasible = c <= self.budget
        f = self.objective(x, rng) if feasible else self.penalty(c)
        return Evaluation(f, c, bool(feasible))

    def objective_batch(self, X) -> np.ndarray:
        from .oracles import influence_table

        X = np.asarray(X, dtype=np.int64)
        table = influence_table(self.graph)
        return table[X @ (1 << np.arange(self.dimension, dtype=np.int64))]

    def fitness_batch(self, X) -> np.ndarray:
        """Exact (enumerated) fitness; tiny instances only."""
        c = cost_batch(self.cost_model, X)
        return np.where(c <= self.budget, self.objective_batch(X), self._penalty_batch(c))


def simulate_ic(graph, seed_set, rng) -> int:
    """Size of one random independent-cascade propagation from ``seed_set``."""
    if isinstance(graph, MaxInfluence):
        graph = graph.graph
    seeds = np.unique(np.asarray(list(seed_set), dtype=np.int64))
    sizes = kernels.simulate_ic_sizes(seeds, graph.indptr, graph.dst, graph.edge_prob, graph.node_count, 1, rng)
    return int(sizes[0])


class MaxCut(Problem):
    """Total weight of edges with exactly one selected endpoint; unconstrained."""

    kind = "max-cut"
    name = "MaxCut"

    def __init__(self, graph: UndirectedGraph, pid=None, instance_id=1):
        self.graph = graph
        self.dimension = graph.node_count
        self.pid = PID_BASE[self.kind] if pid is None else pid
        self.instance_id = instance_id
        self._eu = np.ascontiguousarray(graph.edges[:, 0])
        self._ev = np.ascontiguousarray(graph.edges[:, 1])

    def objective(self, x) -> float:
        return kernels.cut_weight(x, self._eu, self._ev, self.graph.weights)

    def fitness(self, x, rng=None) -> float:
        return kernels.cut_weight(x, self._eu, self._ev, self.graph.weights)

    def evaluate(self, x, rng=None) -> Evaluation:
        x = as_bits(x)
        self._check_len(x)
        return Evaluation(self.objective(x), 0.0, True)

    def objective_batch(self, X) -> np.ndarray:
        X = np.asarray(X)
        return (X[:, self._eu] != X[:, self._ev]) @ self.graph.weights

    fitness_batch = objective_batch


class PackingWhileTraveling(_Constrained):
    """``PWT(x) = P(x) - R * T(x)`` under the knapsack bound ``c(x) <= B``.

    Infeasible points score ``B - c(x) - R * T(v_min)``, below every
    feasible point.
    """

    kind = "pwt"
    name = "PackingWhileTraveling"

    def __init__(self, ttp: TTPInstance, pid=None, instance_id=1, **penalty):
        self.ttp = ttp
        self.dimension = ttp.item_count
        self.pid = PID_BASE[self.kind] if pid is None else pid
        self.instance_id = instance_id
        self.nu = ttp.nu
        self.slowest_time = float(ttp.distances.sum() / ttp.v_min)
        super().__init__(CostModel.explicit(ttp.item_weight, ttp.capacity), **penalty)

    def travel_time(self, x) -> float:
        t = self.ttp
        return kernels.travel_time(x, t.item_weight, t.city_end, t.distances, t.v_max, self.nu)

    def objective(self, x) -> float:
        return kernels.weighted_sum(self.ttp.item_profit, x) - self.ttp.rent * self.travel_time(x)

    def fitness(self, x, rng=None) -> float:
        c = kernels.weighted_sum(self.ttp.item_weight, x)
        if c <= self.budget:
            return self.objective(x)
        return self.penalty(c) - self.ttp.rent * self.slowest_time

    def evaluate(self, x, rng=None) -> Evaluation:
        x = as_bits(x)
        self._check_len(x)
        c = kernels.weighted_sum(self.ttp.item_weight, x)
        feasible = c <= self.budget
        f = self.objective(x) if feasible else self.penalty(c) - self.ttp.rent * self.slowest_time
        return Evaluation(f, c, bool(feasible))

    def objective_batch(self, X) -> np.ndarray:
        t = self.ttp
        X = np.asarray(X, dtype=float)
        carried = np.concatenate([np.zeros((len(X), 1)), np.cumsum(X * t.item_weight, axis=1)], axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            time = (t.distances / (t.v_max - self.nu * carried[:, t.city_end])).sum(axis=1)
        return X @ t.item_profit - t.rent * time

    def fitness_batch(self, X) -> np.ndarray:
        c = np.asarray(X, dtype=float) @ self.ttp.item_weight
        penalised = self._penalty_batch(c) - self.ttp.rent * self.slowest_time
        return np.where(c <= self.budget, self.objective_batch(X), penalised)
