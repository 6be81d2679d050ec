import math

import numpy as np
import pytest

from submodbench import FIXTURES
from submodbench.algorithms import (
    ALGORITHMS,
    DEFAULT_PARAMS,
    AlgorithmSpec,
    Evaluator,
    BudgetExhausted,
    run,
    sa_cooling_factor,
    sa_end_temperature,
    sa_start_temperature,
    sa_temperature,
)
from submodbench.constraints import CostModel
from submodbench.instances import load_instance, random_graph
from submodbench.problems import MaxCoverage, MaxCut, Problem

NAMES = sorted(ALGORITHMS)


class Constant(Problem):
    kind, name = "const", "Constant"

    def __init__(self, n):
        self.dimension, self.pid, self.instance_id = n, 1, 1

    def fitness(self, x, rng=None):
        return 0.0


class OneMax(Problem):
    kind, name = "onemax", "OneMax"

    def __init__(self, n):
        self.dimension, self.pid, self.instance_id = n, 2, 1

    def fitness(self, x, rng=None):
        return float(np.count_nonzero(x))


@pytest.fixture(scope="module")
def coverage():
    g = random_graph(40, 0.1, np.random.default_rng(0))
    return MaxCoverage(g, CostModel.uniform(40, 5))


def test_registry_complete():
    assert NAMES == sorted(["1+1-ea", "fast-ga", "oll-ea", "2rate-ea", "norm-ea", "var-ea", "ghc", "rs",
                            "rls", "sa-auto", "sars-auto", "umda"])
    assert set(DEFAULT_PARAMS) == set(ALGORITHMS)


def test_spec_validation():
    with pytest.raises(ValueError):
        AlgorithmSpec("nope")
    with pytest.raises(ValueError):
        AlgorithmSpec("rls", {"beta": 2})
    assert AlgorithmSpec("fast-ga", {"beta": 2.0}).resolved() == {"beta": 2.0}


@pytest.mark.parametrize("name", NAMES)
def test_budget_one(name, coverage):
    t = run(name, coverage, 1, seed=3)
    assert t.evaluations == 1 and len(t.records) == 1 and t.records[0][0] == 1


@pytest.mark.parametrize("name", NAMES)
def test_trace_invariants_and_determinism(name, coverage):
    a = run(name, coverage, 700, seed=11)
    b = run(name, coverage, 700, seed=11)
    assert a.records == b.records and np.array_equal(a.final_x, b.final_x)
    assert a.evaluations == 700
    evals = [e for e, _ in a.records]
    ys = [y for _, y in a.records]
    assert evals[0] == 1
    assert all(e2 > e1 for e1, e2 in zip(evals, evals[1:]))
    assert all(y2 > y1 for y1, y2 in zip(ys, ys[1:]))
    assert a.final_fitness == ys[-1] == coverage.fitness(a.final_x)


@pytest.mark.parametrize("name", NAMES)
def test_constant_function(name):
    t = run(name, Constant(10), 250, seed=1)
    assert t.evaluations == 250 and t.final_fitness == 0.0 and len(t.records) == 1


@pytest.mark.parametrize("name", NAMES)
def test_tiny_dimensions(name):
    for n in (1, 2, 3):
        t = run(name, OneMax(n), 60, seed=n)
        assert t.evaluations == 60 and t.final_fitness <= n


def test_rls_triangle():
    p = MaxCut(load_instance(FIXTURES / "triangle.gset", "gset"))
    hits = sum(run("rls", p, 500, seed=s).final_fitness == 5.0 for s in range(30))
    assert hits >= 29


@pytest.mark.parametrize("name", ["1+1-ea", "fast-ga", "oll-ea", "2rate-ea", "norm-ea", "var-ea", "rls", "sa-auto", "umda"])
def test_onemax_progress(name):
    t = run(name, OneMax(30), 3000, seed=5)
    assert t.final_fitness >= 27


def test_ghc_sweeps_left_to_right():
    seen = []

    class Spy(OneMax):
        def fitness(self, x, rng=None):
            seen.append(x.copy())
            return 0.0

    run("ghc", Spy(5), 12, seed=0)
    flips = [int(np.flatnonzero(b != a)[0]) for a, b in zip(seen, seen[1:])]
    assert flips == [0, 1, 2, 3, 4, 0, 1, 2, 3, 4, 0]


def test_stop_at():
    t = run("rls", OneMax(20), 10_000, seed=2, stop_at=20)
    assert t.final_fitness == 20 and t.evaluations < 10_000 and t.hitting_time(20) == t.evaluations


def test_evaluator_budget():
    ev = Evaluator(OneMax(3), 2, np.random.default_rng(0))
    ev(np.zeros(3, np.uint8))
    ev(np.ones(3, np.uint8))
    assert ev.remaining == 0
    with pytest.raises(BudgetExhausted):
        ev(np.ones(3, np.uint8))
    assert ev.records == [(1, 0.0), (2, 3.0)]


def test_sa_schedule():
    assert math.exp(-1 / sa_start_temperature()) == pytest.approx(0.1, rel=1e-12)
    assert math.exp(-1 / sa_end_temperature(100)) == pytest.approx(0.1, rel=1e-12)
    assert math.exp(-1 / sa_end_temperature(400)) == pytest.approx(1 / 20, rel=1e-12)
    n, budget = 50, 1000
    gamma = sa_cooling_factor(n, budget)
    for k in (0, 1, 17, 999, 1000):
        assert sa_temperature(k, n, budget) == sa_start_temperature() * gamma**k
    assert sa_temperature(budget, n, budget) == pytest.approx(sa_end_temperature(n), rel=1e-12)


def test_population_methods_truncate_last_generation(coverage):
    for name in ("umda", "2rate-ea", "norm-ea", "oll-ea"):
        assert run(name, coverage, 1003, seed=0).evaluations == 1003


def test_trace_queries():
    t = run("rls", OneMax(10), 200, seed=0)
    assert t.best_at(0) == -math.inf
    assert t.best_at(1) == t.records[0][1]
    assert t.best_at(200) == t.final_fitness
    assert t.hitting_time(-math.inf) == 1
    assert t.hitting_time(11) is None
