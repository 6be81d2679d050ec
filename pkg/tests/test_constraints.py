import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from submodbench.constraints import (
    CostModel,
    CostModelError,
    CostSpec,
    build_cost_model,
    cost,
    cost_batch,
    cost_chebyshev,
    cost_chernoff,
    expected_cost,
    parse_cost_spec,
)

CHERNOFF_HAND = 2 + math.sqrt(4 * math.log(10))  # 5.0348543 (quoted as 5.03486 rounded)


def ones(n, k):
    x = np.zeros(n, dtype=np.uint8)
    x[:k] = 1
    return x


def test_expected_cost_examples():
    m = CostModel.uniform(10, 10)
    assert expected_cost(m, ones(10, 0)) == 0.0
    assert expected_cost(m, ones(10, 7)) == 7.0
    star = CostModel.linear_degree([3, 1, 1, 1], 10)
    assert expected_cost(star, np.array([1, 0, 0, 0], dtype=np.uint8)) == 4.0


def test_length_mismatch():
    with pytest.raises(ValueError):
        expected_cost(CostModel.uniform(3, 1), ones(4, 1))


def test_chebyshev_hand_value():
    m = CostModel.chebyshev(np.ones(5), 10, delta=0.5, alpha=0.1)
    assert cost_chebyshev(m, ones(5, 3)) == pytest.approx(4.5, abs=1e-9)
    assert cost_chebyshev(m, ones(5, 0)) == 0.0


def test_chernoff_hand_value():
    m = CostModel.chernoff(np.ones(5), 10, delta=1.0, alpha=0.1)
    assert abs(cost_chernoff(m, ones(5, 2)) - CHERNOFF_HAND) <= 1e-9
    assert round(cost_chernoff(m, ones(5, 2)), 4) == 5.0349
    assert cost_chernoff(m, ones(5, 0)) == 0.0


@pytest.mark.parametrize("alpha", [0.0, -0.1, 0.51, 1.0])
def test_alpha_out_of_range(alpha):
    with pytest.raises(CostModelError):
        CostModel.chebyshev(np.ones(3), 1, delta=1, alpha=alpha)


def test_alpha_half_allowed():
    CostModel.chernoff(np.ones(3), 1, delta=1, alpha=0.5)


def test_surrogate_kind_mismatch():
    with pytest.raises(CostModelError):
        cost_chernoff(CostModel.chebyshev(np.ones(3), 1, 1, 0.1), ones(3, 1))


def test_cost_dispatch():
    assert cost(CostModel.quadratic_degree([0, 2], 10), np.array([1, 0], dtype=np.uint8)) == 1.0
    assert cost(CostModel.linear_degree([2, 0, 0], 10), np.array([1, 0, 0], dtype=np.uint8)) == 3.0
    m = CostModel.uniform(10, 10)
    assert cost(m, ones(10, 10)) == 10.0 and cost(m, ones(10, 10)) <= m.budget


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 30), seed=st.integers(0, 2**32 - 1), alpha=st.floats(1e-3, 0.5))
def test_delta_zero_collapse(n, seed, alpha):
    rng = np.random.default_rng(seed)
    a = rng.random(n) * 10
    x = rng.integers(0, 2, n, dtype=np.uint8)
    for kind in ("chebyshev", "chernoff"):
        m = CostModel(kind, a, 5.0, delta=0.0, alpha=alpha)
        assert cost(m, x) == expected_cost(m, x)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 20), seed=st.integers(0, 2**32 - 1), delta=st.floats(0, 50), alpha=st.floats(1e-3, 0.5))
def test_surrogate_properties(n, seed, delta, alpha):
    rng = np.random.default_rng(seed)
    a = rng.random(n) * 5
    x = rng.integers(0, 2, n, dtype=np.uint8)
    for kind in ("chebyshev", "chernoff"):
        m = CostModel(kind, a, 1.0, delta=delta, alpha=alpha)
        c = cost(m, x)
        assert c >= expected_cost(m, x)
        # the dispersion term only depends on |x|_1
        y = rng.permutation(x)
        assert math.isclose(c - expected_cost(m, x), cost(m, y) - expected_cost(m, y), abs_tol=1e-9)
        # adding an element never lowers the cost
        if not x.all():
            z = x.copy()
            z[np.flatnonzero(x == 0)[0]] = 1
            assert cost(m, z) >= c


def test_cost_batch_matches_scalar():
    rng = np.random.default_rng(0)
    X = rng.integers(0, 2, (50, 8), dtype=np.uint8)
    for m in (CostModel.uniform(8, 3), CostModel.linear_degree(rng.integers(0, 5, 8), 9),
              CostModel.chebyshev(rng.random(8), 3, 0.5, 0.1), CostModel.chernoff(rng.random(8), 3, 2, 0.3)):
        assert np.allclose(cost_batch(m, X), [cost(m, x) for x in X], rtol=0, atol=1e-12)


def test_negative_costs_rejected():
    with pytest.raises(CostModelError):
        CostModel.explicit([1, -1], 1)


class TestCostSpec:
    def test_plain(self):
        assert parse_cost_spec("uniform") == CostSpec("uniform")
        assert parse_cost_spec("linear-degree:budget=500").budget == 500

    def test_chance(self):
        s = parse_cost_spec("chernoff:delta=20,alpha=0.1,base=linear-degree,budget=500")
        assert (s.kind, s.delta, s.alpha, s.base, s.budget) == ("chernoff", 20, 0.1, "linear_degree", 500)
        assert s.label() == "chernoff:base=linear-degree,delta=20,alpha=0.1,budget=500"

    @pytest.mark.parametrize("text", ["bogus", "uniform:delta=1", "chebyshev:delta=1",
                                      "chebyshev:delta=1,alpha=0.7", "uniform:budget", "uniform:foo=1"])
    def test_errors(self, text):
        with pytest.raises(CostModelError):
            parse_cost_spec(text)

    def test_build_defaults(self):
        deg = np.array([3, 1, 1, 1])
        m = build_cost_model(parse_cost_spec("linear-degree"), deg, {"linear_degree": 500})
        assert m.base_costs.tolist() == [4, 2, 2, 2] and m.budget == 500
        m = build_cost_model(parse_cost_spec("chebyshev:delta=20,alpha=0.1,base=linear-degree"), deg,
                             {"linear_degree": 500})
        assert m.kind == "chebyshev" and m.budget == 500
        with pytest.raises(CostModelError):
            build_cost_model(parse_cost_spec("quadratic-degree"), deg, {})
