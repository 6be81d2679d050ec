import math

import numpy as np
import pytest

from submodbench.operators import (
    biased_uniform_crossover,
    flip_distinct_bits,
    flip_positions,
    make_rng,
    random_bitstring,
    sample_binomial_gt0,
    sample_normal_flip_count,
    sample_power_law,
)

DRAWS = 100_000
# mean of floor(N(1, 0.999) + 0.5) conditioned on [1, 1000], by numerical integration
TRUNCATED_NORMAL_MEAN_R1 = 1.5517771212857179
TRUNCATED_NORMAL_VAR_R1 = 0.47808302773145117


def within_3_sigma(hits, draws, p):
    return abs(hits / draws - p) <= 3 * math.sqrt(p * (1 - p) / draws)


def test_streams_reproducible_and_distinct():
    a, b = make_rng(42, "algorithm"), make_rng(42, "algorithm")
    assert np.array_equal(a.random(5), b.random(5))
    assert not np.array_equal(make_rng(42, "algorithm").random(5), make_rng(42, "noise").random(5))
    assert not np.array_equal(make_rng(42).random(5), make_rng(43).random(5))
    with pytest.raises(KeyError):
        make_rng(1, "other")


def test_pcg64_stream_frozen():
    # fixes the generator choice: PCG64 seeded through SeedSequence spawn keys
    assert make_rng(0).integers(0, 2**32, 3).tolist() == make_rng(0).integers(0, 2**32, 3).tolist()
    assert isinstance(make_rng(0).bit_generator, np.random.PCG64)


class TestBinomialGt0:
    def test_n_one(self):
        rng = make_rng(1)
        assert all(sample_binomial_gt0(1, p, rng) == 1 for p in (0.01, 0.5, 1.0))

    def test_p_one(self):
        assert all(sample_binomial_gt0(17, 1.0, make_rng(2)) == 17 for _ in range(10))

    def test_p_one_frequency(self):
        rng = make_rng(3)
        draws = np.array([sample_binomial_gt0(100, 0.01, rng) for _ in range(DRAWS)])
        assert draws.min() >= 1 and draws.max() <= 100
        p1 = 100 * 0.01 * 0.99**99 / (1 - 0.99**100)
        assert p1 == pytest.approx(0.3697296 / (1 - 0.99**100), rel=1e-6)
        assert within_3_sigma(np.count_nonzero(draws == 1), DRAWS, p1)

    def test_invalid(self):
        with pytest.raises(ValueError):
            sample_binomial_gt0(0, 0.5, make_rng(0))
        with pytest.raises(ValueError):
            sample_binomial_gt0(5, 0.0, make_rng(0))


class TestPowerLaw:
    def test_n_two(self):
        rng = make_rng(4)
        assert all(sample_power_law(2, 1.5, rng) == 1 for _ in range(100))

    def test_ratio(self):
        rng = make_rng(5)
        draws = np.array([sample_power_law(8, 1.5, rng) for _ in range(DRAWS)])
        assert set(np.unique(draws)) <= {1, 2, 3, 4}
        z = sum(k**-1.5 for k in range(1, 5))
        for k in range(1, 5):
            assert within_3_sigma(np.count_nonzero(draws == k), DRAWS, k**-1.5 / z)
        c1, c4 = np.count_nonzero(draws == 1), np.count_nonzero(draws == 4)
        # delta method for the ratio of two multinomial counts
        ratio, p1, p4 = c1 / c4, 1 / z, 4**-1.5 / z
        sd = 8 * math.sqrt((1 - p1) / (DRAWS * p1) + (1 - p4) / (DRAWS * p4) + 2 / DRAWS)
        assert abs(ratio - 8) <= 3 * sd


class TestNormalFlipCount:
    def test_zero_variance(self):
        rng = make_rng(6)
        assert all(sample_normal_flip_count(3.4, 50, rng, variance_factor=0.0) == 3 for _ in range(50))
        assert sample_normal_flip_count(2.5, 50, rng, variance_factor=0.0) == 3

    def test_r_equals_n(self):
        assert sample_normal_flip_count(20, 20, make_rng(7)) == 20

    def test_truncated_mean(self):
        rng = make_rng(8)
        draws = np.array([sample_normal_flip_count(1.0, 1000, rng) for _ in range(DRAWS)])
        assert draws.min() >= 1
        se = math.sqrt(TRUNCATED_NORMAL_VAR_R1 / DRAWS)
        assert abs(draws.mean() - TRUNCATED_NORMAL_MEAN_R1) <= 3 * se

    def test_support(self):
        rng = make_rng(9)
        draws = [sample_normal_flip_count(5.0, 6, rng) for _ in range(10_000)]
        assert min(draws) >= 1 and max(draws) <= 6

    def test_invalid(self):
        with pytest.raises(ValueError):
            sample_normal_flip_count(0.5, 10, make_rng(0))


class TestFlips:
    def test_zero_and_all(self):
        rng = make_rng(10)
        x = random_bitstring(12, rng)
        assert np.array_equal(flip_distinct_bits(x, 0, rng), x)
        assert np.array_equal(flip_distinct_bits(x, 12, rng), 1 - x)

    def test_exact_hamming_distance(self):
        rng = make_rng(11)
        x = random_bitstring(50, rng)
        for ell in range(51):
            assert np.count_nonzero(flip_distinct_bits(x, ell, rng) != x) == ell

    def test_uniform_single_flip(self):
        rng = make_rng(12)
        counts = np.zeros(3)
        x = np.zeros(3, dtype=np.uint8)
        for _ in range(30_000):
            counts += flip_distinct_bits(x, 1, rng)
        assert all(within_3_sigma(c, 30_000, 1 / 3) for c in counts)

    def test_floyd_uniform(self):
        # ell * 4 <= n takes the Floyd branch
        rng = make_rng(13)
        counts = np.zeros(20)
        for _ in range(20_000):
            counts[flip_positions(20, 3, rng)] += 1
        assert all(within_3_sigma(c, 20_000, 3 / 20) for c in counts)

    def test_too_many(self):
        with pytest.raises(ValueError):
            flip_distinct_bits(np.zeros(3, dtype=np.uint8), 4, make_rng(0))

    def test_input_untouched(self):
        x = np.zeros(5, dtype=np.uint8)
        flip_distinct_bits(x, 3, make_rng(0))
        assert not x.any()


class TestCrossover:
    def test_extremes(self):
        rng = make_rng(14)
        a, b = random_bitstring(30, rng), random_bitstring(30, rng)
        assert np.array_equal(biased_uniform_crossover(a, b, 0.0, rng), a)
        assert np.array_equal(biased_uniform_crossover(a, b, 1.0, rng), b)
        assert np.array_equal(biased_uniform_crossover(a, a, 0.37, rng), a)

    def test_rate(self):
        rng = make_rng(15)
        a, b = np.zeros(1000, dtype=np.uint8), np.ones(1000, dtype=np.uint8)
        taken = sum(int(biased_uniform_crossover(a, b, 0.1, rng).sum()) for _ in range(100))
        assert within_3_sigma(taken, 100_000, 0.1)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            biased_uniform_crossover(np.zeros(3, np.uint8), np.zeros(4, np.uint8), 0.5, make_rng(0))
