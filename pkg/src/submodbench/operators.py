"""Variation operators and flip-count samplers.

Random streams are numpy ``Generator`` objects over PCG64.  ``make_rng``
derives independent streams for one run from a 64-bit seed and a purpose
label via ``SeedSequence`` spawn keys.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import stats

PURPOSES = {"algorithm": 0, "noise": 1, "analysis": 2}


def make_rng(seed: int, purpose: str = "algorithm") -> np.random.Generator:
    """Stream ``purpose`` of run ``seed``; distinct purposes never overlap."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(PURPOSES[purpose],))
    return np.random.Generator(np.random.PCG64(ss))


def random_bitstring(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)


@lru_cache(maxsize=1024)
def _binomial_gt0_cdf(n: int, p: float) -> np.ndarray:
    k = np.arange(1, n + 1)
    pmf = stats.binom.pmf(k, n, p)
    cdf = np.cumsum(pmf) / stats.binom.sf(0, n, p)
    cdf[-1] = 1.0
    return cdf


def sample_binomial_gt0(n: int, p: float, rng: np.random.Generator) -> int:
    """Draw from Binomial(n, p) conditioned on a positive outcome (inversion)."""
    if n < 1 or not 0 < p <= 1:
        raise ValueError(f"need n >= 1 and p in (0, 1], got n={n}, p={p}")
    if n == 1 or p == 1.0:
        return n
    cdf = _binomial_gt0_cdf(n, float(p))
    return min(int(np.searchsorted(cdf, rng.random(), side="right")) + 1, n)


@lru_cache(maxsize=256)
def _power_law_cdf(upper: int, beta: float) -> np.ndarray:
    w = np.arange(1, upper + 1, dtype=float) ** -beta
    cdf = np.cumsum(w) / w.sum()
    cdf[-1] = 1.0
    return cdf


def sample_power_law(n: int, beta: float, rng: np.random.Generator) -> int:
    """Draw ``k`` in ``[1, n // 2]`` with probability proportional to ``k**-beta``."""
    upper = max(n // 2, 1)
    if upper == 1:
        return 1
    cdf = _power_law_cdf(upper, float(beta))
    return min(int(np.searchsorted(cdf, rng.random(), side="right")) + 1, upper)


def sample_normal_flip_count(r: float, n: int, rng: np.random.Generator, variance_factor: float = 1.0) -> int:
    """Round a draw of N(r, factor * r (1 - r/n)); redraw until it lies in [1, n]."""
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    var = variance_factor * r * (1.0 - r / n)
    if var <= 0.0:
        return min(max(math.floor(r + 0.5), 1), n)
    sd = math.sqrt(var)
    while True:
        ell = math.floor(rng.normal(r, sd) + 0.5)
        if 1 <= ell <= n:
            return ell


def flip_positions(n: int, ell: int, rng: np.random.Generator) -> np.ndarray:
    """``ell`` distinct positions out of ``n``, uniformly (Floyd's algorithm)."""
    if not 0 <= ell <= n:
        raise ValueError(f"cannot flip {ell} of {n} bits")
    if ell == 1:
        return np.array([rng.integers(n)])
    if ell * 4 > n:
        return rng.permutation(n)[:ell]
    chosen: set[int] = set()
    for j in range(n - ell, n):
        t = int(rng.integers(j + 1))
        chosen.add(j if t in chosen else t)
    return np.fromiter(chosen, dtype=np.int64, count=ell)


def flip_distinct_bits(x: np.ndarray, ell: int, rng: np.random.Generator) -> np.ndarray:
    """Copy of ``x`` with exactly ``ell`` uniformly chosen bits flipped."""
    y = x.copy()
    if ell:
        idx = flip_positions(len(x), ell, rng)
        y[idx] ^= 1
    return y


def biased_uniform_crossover(parent: np.ndarray, mutant: np.ndarray, c: float, rng: np.random.Generator) -> np.ndarray:
    """Take each bit from ``mutant`` with probability ``c``, else from ``parent``."""
    if len(parent) != len(mutant):
        raise ValueError("parents differ in length")
    take = rng.random(len(parent)) < c
    return np.where(take, mutant, parent).astype(np.uint8)
