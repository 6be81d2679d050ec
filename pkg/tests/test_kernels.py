import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from submodbench import kernels
from submodbench.instances import TTPInstance, random_digraph, random_graph

pytestmark = pytest.mark.skipif(not kernels.USE_NUMBA, reason="numba backend disabled")

FAST, SLOW = kernels.NUMBA_KERNELS, kernels.NUMPY_KERNELS
seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 40), p=st.floats(0, 1), seed=seeds)
def test_graph_kernels_agree(n, p, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(n, p, rng, weights=lambda r, m: r.normal(size=m))
    x = rng.integers(0, 2, n, dtype=np.uint8)
    eu, ev = np.ascontiguousarray(g.edges[:, 0]), np.ascontiguousarray(g.edges[:, 1])
    assert FAST["coverage_count"](x, g.indptr, g.indices) == SLOW["coverage_count"](x, g.indptr, g.indices)
    assert FAST["cut_weight"](x, eu, ev, g.weights) == pytest.approx(SLOW["cut_weight"](x, eu, ev, g.weights), rel=1e-12, abs=1e-12)
    w = rng.random(n)
    assert FAST["weighted_sum"](w, x) == pytest.approx(SLOW["weighted_sum"](w, x), rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(cities=st.integers(1, 10), items=st.integers(1, 30), seed=seeds)
def test_travel_time_agrees(cities, items, seed):
    rng = np.random.default_rng(seed)
    t = TTPInstance(rng.integers(1, 50, cities).astype(float), rng.integers(1, 9, items), rng.integers(1, 9, items),
                    rng.integers(0, cities, items), 0.1, 1.0, float(5 * items), 1.0)
    x = rng.integers(0, 2, items, dtype=np.uint8)
    args = (x, t.item_weight, t.city_end, t.distances, t.v_max, t.nu)
    assert FAST["travel_time"](*args) == pytest.approx(SLOW["travel_time"](*args), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 25), density=st.floats(0, 3), seed=seeds, count=st.integers(1, 20))
def test_ic_identical_streams(n, density, seed, count):
    rng = np.random.default_rng(seed)
    g = random_digraph(n, min(int(density * n), n * (n - 1)), rng)
    sel = np.flatnonzero(rng.random(n) < 0.3).astype(np.int64)
    a_rng, b_rng = np.random.default_rng(seed + 1), np.random.default_rng(seed + 1)
    a = FAST["simulate_ic"](sel, g.indptr, g.dst, g.edge_prob, n, count, a_rng)
    b = SLOW["simulate_ic"](sel, g.indptr, g.dst, g.edge_prob, n, count, b_rng)
    assert np.array_equal(a, b)
    # both consumed the same number of draws
    assert a_rng.random() == b_rng.random()


def test_ic_bounds():
    rng = np.random.default_rng(0)
    g = random_digraph(15, 40, rng)
    sel = np.array([0, 3], dtype=np.int64)
    sizes = kernels.simulate_ic_sizes(sel, g.indptr, g.dst, g.edge_prob, 15, 500, rng)
    assert sizes.min() >= 2 and sizes.max() <= 15


def test_env_flag_selects_numpy():
    env = dict(os.environ, SUBMODBENCH_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from submodbench import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_default_backend_is_numba():
    assert kernels.BACKEND == "numba"
    assert kernels.ACTIVE is kernels.NUMBA_KERNELS
