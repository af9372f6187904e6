import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from interference_ri.assignment import Design, sample_assignments
from interference_ri.exceptions import InvalidArgument
from interference_ri.models import SpilloverParams, spillover_from_uniformity, spillover_to_uniformity
from interference_ri.network import generate_network, generate_positions
from interference_ri.teststats import (
    KS,
    MEAN_DIFFERENCE,
    RANK,
    STATISTICS,
    Ecdf,
    asymptotic_ks_pvalue,
    kolmogorov_q,
    ks_statistic,
    mann_whitney,
    mean_difference,
)

import oracles

# 2 * sum_j (-1)^(j-1) exp(-2 j^2), mpmath nsum at 30 digits
KOLMOGOROV_Q_1 = 0.269999671677354521205

samples = st.lists(st.integers(-20, 20), min_size=4, max_size=12)


def split(values, seed):
    g = np.random.default_rng(seed)
    n = len(values)
    m = int(g.integers(1, n))
    z = np.zeros(n, dtype=int)
    z[g.choice(n, m, replace=False)] = 1
    return np.array(values, dtype=float), z


class TestEcdf:
    def test_step_function(self):
        F = Ecdf([3, 1, 2, 2])
        assert F(0) == 0.0
        assert F(2) == 0.75
        assert F(3) == 1.0
        assert F(np.array([1.5, 10])).tolist() == [0.25, 1.0]


class TestKS:
    def test_identical_groups(self):
        assert ks_statistic([1, 2, 3, 1, 2, 3], [1, 1, 1, 0, 0, 0]) == 0.0

    def test_full_separation(self):
        assert ks_statistic([5, 6, 7, 1, 2], [1, 1, 1, 0, 0]) == 1.0

    def test_interleaved(self):
        assert ks_statistic([1, 3, 2, 4], [1, 1, 0, 0]) == 0.5

    def test_empty_group(self):
        with pytest.raises(InvalidArgument):
            ks_statistic([1, 2, 3], [0, 0, 0])

    @settings(max_examples=150, deadline=None)
    @given(samples, st.integers(0, 10_000))
    def test_matches_double_loop(self, values, seed):
        y, z = split(values, seed)
        assert ks_statistic(y, z) == float(oracles.ks(y.tolist(), z.tolist()))


class TestMeanDifference:
    def test_equal_means(self):
        assert mean_difference([1, 3, 2, 2], [1, 1, 0, 0]) == 0.0

    def test_value(self):
        assert mean_difference([2, 4, 1, 1], [1, 1, 0, 0]) == 2.0

    def test_shift_invariant(self):
        y = np.array([2.0, 4.0, 1.0, 1.0, 9.0])
        z = [1, 1, 0, 0, 1]
        assert mean_difference(y + 1000.0, z) == pytest.approx(mean_difference(y, z), rel=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(samples, st.integers(0, 10_000))
    def test_matches_exact_rational(self, values, seed):
        y, z = split(values, seed)
        assert mean_difference(y, z) == pytest.approx(float(oracles.meandiff(y.tolist(), z.tolist())), abs=1e-12)


class TestRank:
    def test_symmetric_groups(self):
        assert mann_whitney([1, 2, 3, 3, 2, 1], [1, 1, 1, 0, 0, 0]) == 0.0

    @pytest.mark.parametrize("n, m", [(5, 2), (8, 4), (9, 6)])
    def test_top_ranks(self, n, m):
        y = np.arange(n, dtype=float)
        z = np.r_[np.zeros(n - m, int), np.ones(m, int)]
        # brute force: rank sum of the top m of n, centred
        brute = abs(sum(range(n - m + 1, n + 1)) - m * (n + 1) / 2)
        assert brute == m * (n - m) / 2
        assert mann_whitney(y, z) == brute

    def test_monotone_invariance(self):
        y = np.array([0.3, 2.0, 1.1, 5.0, 4.2, 0.9])
        z = [1, 0, 1, 1, 0, 0]
        assert mann_whitney(np.exp(y), z) == mann_whitney(y, z)

    @settings(max_examples=100, deadline=None)
    @given(samples, st.integers(0, 10_000))
    def test_matches_midrank_oracle(self, values, seed):
        y, z = split(values, seed)
        assert mann_whitney(y, z) == float(oracles.rank(y.tolist(), z.tolist()))


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(-1000, 1000), min_size=4, max_size=15), st.integers(0, 10_000))
    def test_invariances(self, values, seed):
        y, z = split(values, seed)
        f = lambda v: np.exp(v / 100.0) * 7 + 3  # strictly increasing on this grid
        assert KS(f(y), z) == KS(y, z)
        assert RANK(f(y), z) == RANK(y, z)
        assert MEAN_DIFFERENCE(y * 3.0, z) == pytest.approx(3.0 * MEAN_DIFFERENCE(y, z), rel=1e-9, abs=1e-9)

    @pytest.mark.parametrize("name", sorted(STATISTICS))
    def test_constant_outcomes_zero(self, name):
        stat = STATISTICS[name]
        Z = sample_assignments(Design(10, 4), 20, 1)
        assert np.all(stat.many(np.full(10, 42.5), Z) == 0.0)

    @pytest.mark.parametrize("name", sorted(STATISTICS))
    def test_batch_equals_single(self, name):
        stat = STATISTICS[name]
        y = np.random.default_rng(3).normal(size=15)
        Z = sample_assignments(Design(15, 6), 30, 4)
        batch = stat.many(y, Z)
        single = np.array([stat(y, z) for z in Z])
        assert np.allclose(batch, single, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("name", sorted(STATISTICS))
    def test_joint_permutation_invariance(self, name):
        stat = STATISTICS[name]
        g = np.random.default_rng(5)
        y = g.normal(size=12)
        z = np.r_[np.ones(5, int), np.zeros(7, int)]
        perm = g.permutation(12)
        assert stat(y[perm], z[perm]) == pytest.approx(stat(y, z), rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("name", sorted(STATISTICS))
    def test_effect_increasing_in_beta(self, name):
        stat = STATISTICS[name]
        net = generate_network(generate_positions(64, 3), 128)
        y0 = np.random.default_rng(8).uniform(30, 70, 64)
        truth = SpilloverParams(2.0, 0.5)
        observed = [(spillover_from_uniformity(y0, w, net, truth), w)
                    for w in sample_assignments(Design(64, 32), 200, 13)]

        def median_stat(beta):
            hyp = SpilloverParams(beta, 0.5)
            return np.median([stat(spillover_to_uniformity(y, w, net, hyp), w) for y, w in observed])

        for wrong in ((2.0, 3.0, 4.0, 8.0), (2.0, 1.5, 1.0, 0.5)):
            meds = [median_stat(b) for b in wrong]
            assert all(a <= b for a, b in zip(meds, meds[1:])), meds


class TestKolmogorov:
    def test_zero(self):
        assert kolmogorov_q(0.0) == 1.0
        assert asymptotic_ks_pvalue(0.0, 10, 10) == 1.0

    def test_lambda_one(self):
        assert kolmogorov_q(1.0) == pytest.approx(KOLMOGOROV_Q_1, abs=1e-15)
        assert kolmogorov_q(1.0) == pytest.approx(oracles.kolmogorov_partial_sum(1.0), abs=1e-15)

    def test_separation_tiny_but_positive(self):
        p = asymptotic_ks_pvalue(1.0, 5000, 5000)
        assert 0.0 < p < 1e-300

    @pytest.mark.parametrize("lam", [0.05, 0.2, 0.5, 0.8, 1.3, 2.0, 3.5])
    def test_against_scipy(self, lam):
        assert kolmogorov_q(lam) == pytest.approx(special.kolmogorov(lam), abs=1e-13)

    def test_bounds(self):
        with pytest.raises(InvalidArgument):
            asymptotic_ks_pvalue(1.5, 3, 3)
        with pytest.raises(InvalidArgument):
            asymptotic_ks_pvalue(0.5, 0, 3)
