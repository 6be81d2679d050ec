"""The twelve baseline optimisers.

Each optimiser is a function ``(f, n, budget, rng, **params)`` that loops
forever calling ``f(x) -> float``.  ``run`` hands it an evaluation counter
which raises once the budget is spent, so population methods are cut off
mid-generation and every run uses exactly ``budget`` evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operators import (
    biased_uniform_crossover,
    flip_distinct_bits,
    make_rng,
    random_bitstring,
    sample_binomial_gt0,
    sample_normal_flip_count,
    sample_power_law,
)


class _Stop(Exception):
    pass


class BudgetExhausted(_Stop):
    pass


class TargetReached(_Stop):
    pass


@dataclass
class RunTrace:
    """Improvement-only record of one run.

    ``records`` holds ``(evaluation, best_so_far)`` pairs, strictly
    increasing in both entries; the first evaluation is always recorded.
    """

    algorithm: str
    problem_id: int
    problem_name: str
    instance_id: int
    dimension: int
    seed: int
    budget: int
    records: list[tuple[int, float]] = field(default_factory=list)
    final_fitness: float = -math.inf
    final_x: np.ndarray | None = None
    evaluations: int = 0
    params: dict = field(default_factory=dict)

    def best_at(self, t: int) -> float:
        """Best-so-far fitness after ``t`` evaluations (-inf before the first)."""
        best = -math.inf
        for e, y in self.records:
            if e > t:
                break
            best = y
        return best

    def hitting_time(self, target: float) -> int | None:
        for e, y in self.records:
            if y >= target:
                return e
        return None


class Evaluator:
    """Counts evaluations, logs improvements and enforces the budget."""

    def __init__(self, problem, budget: int, noise_rng, stop_at=None):
        self.problem = problem
        self.budget = budget
        self.noise_rng = noise_rng
        self.stop_at = stop_at
        self.evaluations = 0
        self.best = -math.inf
        self.best_x = None
        self.records: list[tuple[int, float]] = []

    @property
    def remaining(self) -> int:
        return self.budget - self.evaluations

    def __call__(self, x) -> float:
        if self.evaluations >= self.budget:
            raise BudgetExhausted
        self.evaluations += 1
        y = float(self.problem.fitness(x, self.noise_rng))
        if y > self.best:
            self.best = y
            self.best_x = x.copy()
            self.records.append((self.evaluations, y))
            if self.stop_at is not None and y >= self.stop_at:
                raise TargetReached
        return y


# --- mutation-only elitists --------------------------------------------------

def _elitist(f, n, rng, draw_ell):
    x = random_bitstring(n, rng)
    fx = f(x)
    while True:
        y = flip_distinct_bits(x, draw_ell(), rng)
        fy = f(y)
        if fy >= fx:
            x, fx = y, fy


def one_plus_one_ea(f, n, budget, rng, mutation_rate=None):
    p = 1.0 / n if mutation_rate is None else mutation_rate
    _elitist(f, n, rng, lambda: sample_binomial_gt0(n, p, rng))


def fast_ga(f, n, budget, rng, beta=1.5):
    _elitist(f, n, rng, lambda: sample_power_law(n, beta, rng))


def rls(f, n, budget, rng):
    _elitist(f, n, rng, lambda: 1)


def one_plus_lambda_lambda_ea(f, n, budget, rng, lambda0=10.0, update_factor=1.5):
    """Self-adjusting (1+(lambda,lambda)) EA>0.

    Crossover offspring identical to the parent are not evaluated.
    """
    lam = min(max(float(lambda0), 1.0), float(n))
    grow = update_factor ** 0.25
    x = random_bitstring(n, rng)
    fx = f(x)
    while True:
        k = max(1, math.floor(lam + 0.5))
        ell = sample_binomial_gt0(n, min(lam / n, 1.0), rng)
        mutant, f_mutant = None, -math.inf
        for _ in range(k):
            m = flip_distinct_bits(x, ell, rng)
            fm = f(m)
            if mutant is None or fm > f_mutant:
                mutant, f_mutant = m, fm
        child, f_child = None, -math.inf
        for _ in range(k):
            y = biased_uniform_crossover(x, mutant, 1.0 / lam, rng)
            if np.array_equal(y, x):
                continue
            fy = f(y)
            if child is None or fy > f_child:
                child, f_child = y, fy
        if child is not None and f_child > fx:
            lam = max(lam / update_factor, 1.0)
        else:
            lam = min(lam * grow, float(n))
        if child is not None and f_child >= fx:
            x, fx = child, f_child


def two_rate_ea(f, n, budget, rng, offspring=10, r0=2.0, p_keep_best=0.5):
    """(1+10) EA>0 with two-rate self-adjustment.

    Half the offspring mutate with rate r/(2n), half with 2r/n.  Afterwards r
    becomes the winning rate with probability ``p_keep_best``, otherwise r/2
    or 2r uniformly; then it is kept inside [2, n/4].
    """
    lo = 2.0
    hi = max(n / 4.0, lo)
    r = min(max(float(r0), lo), hi)
    x = random_bitstring(n, rng)
    fx = f(x)
    while True:
        best, f_best, best_rate, ties = None, -math.inf, r, 0
        for i in range(offspring):
            rate = r / 2.0 if i < offspring // 2 else 2.0 * r
            y = flip_distinct_bits(x, sample_binomial_gt0(n, min(rate / n, 1.0), rng), rng)
            fy = f(y)
            if best is None or fy > f_best:
                best, f_best, best_rate, ties = y, fy, rate, 1
            elif fy == f_best:
                ties += 1
                if rng.random() * ties < 1.0:
                    best, best_rate = y, rate
        if f_best >= fx:
            x, fx = best, f_best
        if rng.random() < p_keep_best:
            r = best_rate
        else:
            r = r / 2.0 if rng.random() < 0.5 else 2.0 * r
        r = min(max(r, lo), hi)


def _normal_ea(f, n, rng, offspring, r0, decay):
    r = float(min(max(r0, 1), n))
    stale = 0  # generations since the last strict improvement
    x = random_bitstring(n, rng)
    fx = f(x)
    while True:
        factor = decay**stale if decay is not None else 1.0
        best, f_best, best_ell = None, -math.inf, 1
        for _ in range(offspring):
            ell = sample_normal_flip_count(r, n, rng, factor)
            y = flip_distinct_bits(x, ell, rng)
            fy = f(y)
            if best is None or fy > f_best:
                best, f_best, best_ell = y, fy, ell
        stale = 0 if f_best > fx else stale + 1
        if f_best >= fx:
            x, fx = best, f_best
        r = float(best_ell)


def norm_ea(f, n, budget, rng, offspring=10, r0=2.0):
    _normal_ea(f, n, rng, offspring, r0, decay=None)


def var_ea(f, n, budget, rng, offspring=10, r0=2.0, F=0.98):
    _normal_ea(f, n, rng, offspring, r0, decay=F)


def ghc(f, n, budget, rng):
    """Greedy hill climber: flip bit 0, 1, ..., n-1, 0, ... in turn."""
    x = random_bitstring(n, rng)
    fx = f(x)
    i = 0
    while True:
        y = x.copy()
        y[i] ^= 1
        fy = f(y)
        if fy >= fx:
            x, fx = y, fy
        i = (i + 1) % n


def random_search(f, n, budget, rng):
    while True:
        f(random_bitstring(n, rng))


# --- simulated annealing -----------------------------------------------------

def sa_start_temperature() -> float:
    # a move one unit worse is accepted with probability 0.1
    return 1.0 / math.log(10.0)


def sa_end_temperature(n: int) -> float:
    # a move one unit worse is accepted with probability 1/sqrt(n)
    return 2.0 / math.log(n) if n > 1 else sa_start_temperature()


def sa_cooling_factor(n: int, budget: int) -> float:
    return (sa_end_temperature(n) / sa_start_temperature()) ** (1.0 / budget)


def sa_temperature(k: int, n: int, budget: int) -> float:
    """Temperature after ``k`` evaluations of a ``budget``-evaluation schedule."""
    return sa_start_temperature() * sa_cooling_factor(n, budget) ** k


def _anneal(f, n, budget, rng):
    t0 = sa_start_temperature()
    gamma = sa_cooling_factor(n, budget)
    x = random_bitstring(n, rng)
    fx = f(x)
    for k in range(2, budget + 1):
        y = x.copy()
        y[rng.integers(n)] ^= 1
        fy = f(y)
        if fy >= fx or rng.random() < math.exp((fy - fx) / (t0 * gamma**k)):
            x, fx = y, fy


def sa_auto(f, n, budget, rng):
    _anneal(f, n, budget, rng)


def sars_auto(f, n, budget, rng):
    """SA restarted from scratch; round i gets n * 2**i evaluations."""
    i = 0
    while True:
        # the last round is cut short, so cool it over what is left
        _anneal(f, n, max(min(n * 2**i, f.remaining), 1), rng)
        i += 1


# --- estimation of distribution ---------------------------------------------

def umda(f, n, budget, rng, population=50, selected=None):
    mu = population // 2 if selected is None else selected
    lo, hi = min(1.0 / n, 0.5), max(1.0 - 1.0 / n, 0.5)
    pop = rng.integers(0, 2, size=(population, n), dtype=np.uint8)
    while True:
        fits = np.array([f(pop[i]) for i in range(population)])
        # best first, ties in random order
        order = np.lexsort((rng.random(population), -fits))
        q = np.clip(pop[order[:mu]].mean(axis=0), lo, hi)
        pop = (rng.random((population, n)) < q).astype(np.uint8)


ALGORITHMS = {
    "1+1-ea": one_plus_one_ea,
    "fast-ga": fast_ga,
    "oll-ea": one_plus_lambda_lambda_ea,
    "2rate-ea": two_rate_ea,
    "norm-ea": norm_ea,
    "var-ea": var_ea,
    "ghc": ghc,
    "rs": random_search,
    "rls": rls,
    "sa-auto": sa_auto,
    "sars-auto": sars_auto,
    "umda": umda,
}

DEFAULT_PARAMS = {
    "1+1-ea": {"mutation_rate": None},
    "fast-ga": {"beta": 1.5},
    "oll-ea": {"lambda0": 10.0, "update_factor": 1.5},
    "2rate-ea": {"offspring": 10, "r0": 2.0, "p_keep_best": 0.5},
    "norm-ea": {"offspring": 10, "r0": 2.0},
    "var-ea": {"offspring": 10, "r0": 2.0, "F": 0.98},
    "ghc": {},
    "rs": {},
    "rls": {},
    "sa-auto": {},
    "sars-auto": {},
    "umda": {"population": 50, "selected": None},
}


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.name!r}; choose from {sorted(ALGORITHMS)}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.name])
        if unknown:
            raise ValueError(f"unknown parameters for {self.name}: {sorted(unknown)}")

    def resolved(self) -> dict:
        return {**DEFAULT_PARAMS[self.name], **self.params}


def run(spec, problem, budget: int, seed: int, stop_at: float | None = None) -> RunTrace:
    """Run ``spec`` on ``problem`` for ``budget`` evaluations.

    The algorithm and the problem noise draw from separate streams of
    ``seed``.  With ``stop_at`` the run ends early once that fitness is hit.
    """
    if isinstance(spec, str):
        spec = AlgorithmSpec(spec)
    if budget < 1:
        raise ValueError("budget must be at least 1")
    params = spec.resolved()
    evaluator = Evaluator(problem, budget, make_rng(seed, "noise"), stop_at)
    try:
        ALGORITHMS[spec.name](evaluator, problem.dimension, budget, make_rng(seed, "algorithm"), **params)
    except _Stop:
        pass
    return RunTrace(
        algorithm=spec.name,
        problem_id=problem.pid,
        problem_name=problem.name,
        instance_id=problem.instance_id,
        dimension=problem.dimension,
        seed=seed,
        budget=budget,
        records=evaluator.records,
        final_fitness=evaluator.best,
        final_x=evaluator.best_x,
        evaluations=evaluator.evaluations,
        params=params,
    )
