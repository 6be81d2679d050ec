"""Fixed-target and fixed-budget statistics over run traces.

Conventions:

* ERT = (sum over runs of hitting time, or budget on failure) / successes.
* Quantiles use the inverted empirical CDF (type 1): the smallest value
  whose empirical CDF reaches ``q``.
* The reference algorithm for a quantile target has the best median final
  fitness, ties broken by the better mean.
* ECDF targets are spaced linearly per (problem, instance) cell between the
  worst and best final fitness over all algorithms in the cell.
* Glicko-2 uses rating 1500, deviation 350, volatility 0.06, tau 0.5; one
  rating period per (problem, instance) cell.
* Win fractions pair run k of A with run k of B unless ``all_pairs``; ties
  count for neither side.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algorithms import RunTrace

GLICKO_SCALE = 173.7178
DEFAULT_RATING = 1500.0
DEFAULT_DEVIATION = 350.0
DEFAULT_VOLATILITY = 0.06
DEFAULT_TAU = 0.5


# --- grouping helpers --------------------------------------------------------

def cell_key(trace: RunTrace) -> tuple[int, int, int]:
    return (trace.problem_id, trace.instance_id, trace.dimension)


def final_table(traces) -> dict[tuple, dict[str, list[float]]]:
    """``{(pid, instance, dim): {algorithm: [final fitness per run]}}``."""
    table: dict[tuple, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    for t in traces:
        table[cell_key(t)][t.algorithm].append(t.final_fitness)
    return {k: dict(v) for k, v in table.items()}


# --- fixed target ------------------------------------------------------------

@dataclass
class ErtResult:
    target: float
    ert: dict[str, float]
    successes: dict[str, int]
    runs: dict[str, int]


def compute_ert(traces, target: float) -> float:
    """Expected running time of one algorithm on one cell."""
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one trace")
    spent, hits = 0, 0
    for t in traces:
        hit = t.hitting_time(target)
        if hit is None:
            spent += t.budget
        else:
            spent += hit
            hits += 1
    return spent / hits if hits else math.inf


def quantile(values, q: float) -> float:
    return float(np.quantile(np.asarray(values, dtype=float), q, method="inverted_cdf"))


def best_algorithm(finals: dict[str, list[float]]) -> str:
    return max(sorted(finals), key=lambda a: (float(np.median(finals[a])), float(np.mean(finals[a]))))


def quantile_target(finals: dict[str, list[float]], q: float = 0.02) -> float:
    """``q``-quantile of the final fitness of the best algorithm."""
    if not finals:
        raise ValueError("need at least one algorithm")
    return quantile(finals[best_algorithm(finals)], q)


def ert_table(traces, q: float = 0.02) -> dict[tuple, ErtResult]:
    """ERT of every algorithm at the quantile target of each cell."""
    by_cell: dict[tuple, dict[str, list[RunTrace]]] = defaultdict(lambda: defaultdict(list))
    for t in traces:
        by_cell[cell_key(t)][t.algorithm].append(t)
    out = {}
    for key, algs in sorted(by_cell.items()):
        finals = {a: [t.final_fitness for t in ts] for a, ts in algs.items()}
        target = quantile_target(finals, q)
        out[key] = ErtResult(
            target,
            {a: compute_ert(ts, target) for a, ts in sorted(algs.items())},
            {a: sum(t.hitting_time(target) is not None for t in ts) for a, ts in sorted(algs.items())},
            {a: len(ts) for a, ts in sorted(algs.items())},
        )
    return out


def budget_grid(max_budget: int, points: int = 50) -> np.ndarray:
    """Roughly log-spaced integer budgets from 1 to ``max_budget``."""
    return np.unique(np.geomspace(1, max_budget, points).round().astype(np.int64))


def compute_ecdf(traces, budgets, n_targets: int = 25) -> dict[str, np.ndarray]:
    """Aggregated ECDF: per algorithm, the fraction of (cell, run, target)
    triples whose target is hit within each budget."""
    budgets = np.asarray(budgets)
    by_cell: dict[tuple, list[RunTrace]] = defaultdict(list)
    for t in traces:
        by_cell[cell_key(t)].append(t)
    if not by_cell:
        raise ValueError("need at least one trace")
    hit_times: dict[str, list[np.ndarray]] = defaultdict(list)
    for ts in by_cell.values():
        finals = [t.final_fitness for t in ts]
        targets = np.linspace(min(finals), max(finals), n_targets)
        for t in ts:
            hits = (t.hitting_time(y) for y in targets)
            times = np.array([math.inf if h is None else h for h in hits], dtype=float)
            hit_times[t.algorithm].append(times)
    out = {}
    for alg, rows in sorted(hit_times.items()):
        times = np.concatenate(rows)
        out[alg] = (times[None, :] <= budgets[:, None]).mean(axis=1)
    return out


# --- glicko-2 ----------------------------------------------------------------

@dataclass
class Glicko2State:
    rating: float = DEFAULT_RATING
    deviation: float = DEFAULT_DEVIATION
    volatility: float = DEFAULT_VOLATILITY


def _g(phi):
    return 1.0 / math.sqrt(1.0 + 3.0 * phi * phi / math.pi**2)


def _new_volatility(sigma, phi, v, delta, tau, eps=1e-6):
    a = math.log(sigma * sigma)

    def f(x):
        ex = math.exp(x)
        return ex * (delta * delta - phi * phi - v - ex) / (2 * (phi * phi + v + ex) ** 2) - (x - a) / tau**2

    A = a
    if delta * delta > phi * phi + v:
        B = math.log(delta * delta - phi * phi - v)
    else:
        k = 1
        while f(a - k * tau) < 0:
            k += 1
        B = a - k * tau
    fa, fb = f(A), f(B)
    while abs(B - A) > eps:
        C = A + (A - B) * fa / (fb - fa)
        fc = f(C)
        if fc * fb <= 0:
            A, fa = B, fb
        else:
            fa /= 2
        B, fb = C, fc
    return math.exp(A / 2)


def glicko2_update(states: dict[str, Glicko2State], games, tau: float = DEFAULT_TAU) -> dict[str, Glicko2State]:
    """One rating period.  ``games`` holds ``(a, b, score_of_a)`` with score
    1, 0.5 or 0; every game counts for both players."""
    results: dict[str, list[tuple[str, float]]] = defaultdict(list)
    for a, b, s in games:
        results[a].append((b, s))
        results[b].append((a, 1.0 - s))
    new = {}
    for name, st in states.items():
        mu = (st.rating - DEFAULT_RATING) / GLICKO_SCALE
        phi = st.deviation / GLICKO_SCALE
        played = results.get(name)
        if not played:
            phi_star = math.sqrt(phi * phi + st.volatility**2)
            new[name] = Glicko2State(st.rating, phi_star * GLICKO_SCALE, st.volatility)
            continue
        v_inv, score_sum = 0.0, 0.0
        for opp, s in played:
            o = states[opp]
            mu_j = (o.rating - DEFAULT_RATING) / GLICKO_SCALE
            g = _g(o.deviation / GLICKO_SCALE)
            e = 1.0 / (1.0 + math.exp(-g * (mu - mu_j)))
            v_inv += g * g * e * (1 - e)
            score_sum += g * (s - e)
        v = 1.0 / v_inv
        delta = v * score_sum
        sigma = _new_volatility(st.volatility, phi, v, delta, tau)
        phi_star = math.sqrt(phi * phi + sigma * sigma)
        phi_new = 1.0 / math.sqrt(1.0 / phi_star**2 + 1.0 / v)
        mu_new = mu + phi_new**2 * score_sum
        new[name] = Glicko2State(GLICKO_SCALE * mu_new + DEFAULT_RATING, GLICKO_SCALE * phi_new, sigma)
    return new


def sample_games(finals: dict[str, list[float]], games_per_pair: int, rng) -> list[tuple[str, str, float]]:
    """Games for one cell: each pair plays ``games_per_pair`` times, each
    game comparing the finals of one random run per side."""
    algs = sorted(finals)
    games = []
    for i, a in enumerate(algs):
        for b in algs[i + 1:]:
            ra = rng.integers(len(finals[a]), size=games_per_pair)
            rb = rng.integers(len(finals[b]), size=games_per_pair)
            for ia, ib in zip(ra, rb):
                ya, yb = finals[a][ia], finals[b][ib]
                games.append((a, b, 1.0 if ya > yb else 0.0 if ya < yb else 0.5))
    return games


def glicko2_rank(table: dict, games_per_pair: int = 25, rng=None, tau: float = DEFAULT_TAU):
    """Rank algorithms from a final-fitness table (see ``final_table``).

    Returns ``[(algorithm, Glicko2State), ...]`` sorted best first.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    algs = sorted({a for cell in table.values() for a in cell})
    if len(algs) < 2:
        raise ValueError("glicko2 ranking needs at least two algorithms")
    states = {a: Glicko2State() for a in algs}
    for key in sorted(table):
        states = glicko2_update(states, sample_games(table[key], games_per_pair, rng), tau)
    return sorted(states.items(), key=lambda kv: (-kv[1].rating, kv[0]))


# --- pairwise wins -----------------------------------------------------------

def pairwise_win_fraction(table: dict, all_pairs: bool = False) -> tuple[list[str], np.ndarray]:
    """``M[i, j]`` = fraction of comparisons in which algorithm i's final
    fitness is strictly better than algorithm j's; diagonal 0.5."""
    algs = sorted({a for cell in table.values() for a in cell})
    k = len(algs)
    wins = np.zeros((k, k))
    total = np.zeros((k, k))
    for cell in table.values():
        for i, a in enumerate(algs):
            for j, b in enumerate(algs):
                if i == j or a not in cell or b not in cell:
                    continue
                ya, yb = np.asarray(cell[a]), np.asarray(cell[b])
                if all_pairs:
                    wins[i, j] += np.count_nonzero(ya[:, None] > yb[None, :])
                    total[i, j] += ya.size * yb.size
                else:
                    if len(ya) != len(yb):
                        raise ValueError(f"paired comparison needs equal run counts ({a}: {len(ya)}, {b}: {len(yb)})")
                    wins[i, j] += np.count_nonzero(ya > yb)
                    total[i, j] += len(ya)
    with np.errstate(invalid="ignore"):
        frac = np.where(total > 0, wins / np.maximum(total, 1), np.nan)
    np.fill_diagonal(frac, 0.5)
    return algs, frac


# --- CSV output --------------------------------------------------------------

def write_reports(traces, out_dir, target_quantile=0.02, ecdf_targets=25, games_per_pair=25,
                  seed=0, all_pairs=False, budget_points=50) -> list[Path]:
    """Write ``ert.csv``, ``ecdf.csv``, ``glicko2.csv`` and ``winfrac.csv``.

    ECDF, glicko-2 and win fractions are grouped by problem name (one
    aggregate per problem kind across its ids and instances).
    """
    traces = list(traces)
    if not traces:
        raise ValueError("empty dataset")
    out_dir = Path(out_dir)
    rows_ert, rows_ecdf, rows_glicko, rows_win = [], [], [], []
    names = {t.problem_id: t.problem_name for t in traces}
    for (pid, inst, dim), res in ert_table(traces, target_quantile).items():
        for alg in res.ert:
            rows_ert.append([pid, names[pid], inst, dim, alg, repr(res.target), repr(res.ert[alg]),
                             res.successes[alg], res.runs[alg]])

    by_name: dict[str, list[RunTrace]] = defaultdict(list)
    for t in traces:
        by_name[t.problem_name].append(t)
    rng = np.random.default_rng(seed)
    for pname, ts in sorted(by_name.items()):
        grid = budget_grid(max(t.budget for t in ts), budget_points)
        for alg, curve in compute_ecdf(ts, grid, ecdf_targets).items():
            rows_ecdf += [[pname, alg, int(b), repr(float(v))] for b, v in zip(grid, curve)]
        table = final_table(ts)
        algs = sorted({t.algorithm for t in ts})
        if len(algs) >= 2:
            ranked = glicko2_rank(table, games_per_pair, rng)
            for rank, (alg, st) in enumerate(ranked, start=1):
                rows_glicko.append([pname, rank, alg, repr(st.rating), repr(st.deviation), repr(st.volatility)])
        names_w, frac = pairwise_win_fraction(table, all_pairs)
        for i, a in enumerate(names_w):
            for j, b in enumerate(names_w):
                rows_win.append([pname, a, b, repr(float(frac[i, j]))])

    out_dir.mkdir(parents=True, exist_ok=True)
    specs = [
        ("ert.csv", ["problem_id", "problem", "instance", "dimension", "algorithm", "target", "ert", "successes", "runs"], rows_ert),
        ("ecdf.csv", ["problem", "algorithm", "budget", "fraction"], rows_ecdf),
        ("glicko2.csv", ["problem", "rank", "algorithm", "rating", "deviation", "volatility"], rows_glicko),
        ("winfrac.csv", ["problem", "algorithm", "opponent", "fraction"], rows_win),
    ]
    paths = []
    for name, header, rows in specs:
        path = out_dir / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        paths.append(path)
    return paths
