import math
import warnings

import numpy as np
import pytest
from scipy import stats

from noisydup.config import ModelSpec
from noisydup.errors import ConfigError, RangeError
from noisydup.estimator import (
    SmallBlockWarning,
    aep_convergence_diagnostic,
    check_randomly_indexed_relation,
    estimate_information_rate,
    jump_time_entropy,
    jump_time_pmf,
    conditioning_bound_property_test,
    sweep_information_rate,
)
from noisydup.model import (
    entropy_bits,
    make_bernoulli_duration,
    make_bsc_noise,
    make_geometric_duration,
    make_markov_source,
    make_noise,
)
from noisydup.simulate import sample_trajectory

pytestmark = pytest.mark.filterwarnings("ignore::noisydup.estimator.SmallBlockWarning")


class TestEstimate:
    """Single-point information-rate estimates."""

    @pytest.mark.parametrize("m", [1000, 5000])
    def test_identity_channel(self, ber_half, m):
        res = estimate_information_rate(ber_half, make_bernoulli_duration(0.0), make_bsc_noise(0.0), m, 1)
        assert (res.h_source, res.h_output, res.h_joint, res.info_rate) == (1.0, 1.0, 1.0, 1.0)

    def test_terms_recombine(self, ber_half, bsc01):
        res = estimate_information_rate(ber_half, make_geometric_duration(0.4), bsc01, 3000, 2, replicates=4)
        assert res.info_rate == pytest.approx(np.mean(res.replicate_rates))
        assert res.h_source + res.h_output - res.h_joint == pytest.approx(res.info_rate, abs=1e-12)
        assert res.ci95_halfwidth == pytest.approx(
            1.959964 * np.std(res.replicate_rates, ddof=1) / 2, rel=1e-5
        )

    def test_single_replicate_has_no_interval(self, ber_half, bsc01):
        res = estimate_information_rate(ber_half, make_bernoulli_duration(0.5), bsc01, 2000, 1)
        assert res.ci95_halfwidth is None and res.replicates == 1

    def test_deterministic(self, ber_half, bsc01):
        args = (ber_half, make_bernoulli_duration(0.5), bsc01, 2000, 17)
        assert estimate_information_rate(*args, replicates=3) == estimate_information_rate(*args, replicates=3)

    def test_parallel_matches_serial(self, ber_half, bsc01):
        args = (ber_half, make_bernoulli_duration(0.5), bsc01, 2000, 17)
        serial = estimate_information_rate(*args, replicates=3, workers=1)
        parallel = estimate_information_rate(*args, replicates=3, workers=2)
        assert serial == parallel

    def test_analytic_source(self, sticky_source, bsc01):
        res = estimate_information_rate(sticky_source, make_bernoulli_duration(0.5), bsc01, 2000, 3, analytic_source=True)
        assert res.h_source == pytest.approx(0.468996, abs=1e-6)

    def test_constrained_marginal_close_to_embedded(self, ber_half, bsc01):
        dur = make_bernoulli_duration(0.5)
        a = estimate_information_rate(ber_half, dur, bsc01, 5000, 4)
        b = estimate_information_rate(ber_half, dur, bsc01, 5000, 4, output_marginal="constrained")
        assert b.h_output > a.h_output
        assert abs(a.info_rate - b.info_rate) < 2e-3

    def test_small_block_warns(self, ber_half, bsc01):
        with pytest.warns(SmallBlockWarning):
            estimate_information_rate(ber_half, make_bernoulli_duration(0.5), bsc01, 100, 1)

    def test_bad_arguments(self, ber_half, bsc01):
        dur = make_bernoulli_duration(0.5)
        with pytest.raises(RangeError):
            estimate_information_rate(ber_half, dur, bsc01, 1000, 1, replicates=0)
        with pytest.raises(ConfigError):
            estimate_information_rate(ber_half, dur, bsc01, 1000, 1, output_marginal="exact")
        ternary = make_noise(np.full((3, 2), 0.5), (0, 1, 2), (0, 1))
        with pytest.raises(ConfigError):
            estimate_information_rate(ber_half, dur, ternary, 1000, 1)


class TestUselessChannel:
    """p = 0.5 carries no information; the estimator modes differ in how they show it."""

    def test_constrained_marginal_is_zero(self, ber_half):
        res = estimate_information_rate(
            ber_half, make_bernoulli_duration(0.3), make_bsc_noise(0.5), 10_000, 5,
            replicates=5, output_marginal="constrained",
        )
        assert abs(res.info_rate) < 1e-12

    @pytest.mark.parametrize("m,pd", [(1000, 0.3), (10_000, 0.5)])
    def test_embedded_gap_is_length_probability(self, ber_half, m, pd):
        # the embedded output law ignores the segment count, so the density
        # collapses to log2 P(T_m = t) / m, which is O(log m / m)
        dur = make_bernoulli_duration(pd)
        res = estimate_information_rate(ber_half, dur, make_bsc_noise(0.5), m, 8)
        expected = stats.binom.logpmf(res.t_m - m, m, pd) / math.log(2) / m
        assert res.info_rate == pytest.approx(expected, abs=1e-10)
        assert res.info_rate < 0


class TestSweep:
    def test_points_and_seeds(self):
        rows = sweep_information_rate(ModelSpec(p=0.1), [0.0, 0.5, 1.0], 2000, 3, workers=1)
        assert [r.model.pd for r in rows] == [0.0, 0.5, 1.0]
        assert len({r.seed for r in rows}) == 3
        assert all(r.ok for r in rows)

    def test_failures_are_recorded(self):
        rows = sweep_information_rate(ModelSpec(dup="geometric", p=0.1), [0.5, 1.0], 1000, 3, workers=1)
        assert rows[0].ok and not rows[1].ok
        assert math.isnan(rows[1].info_rate)


class TestAep:
    def test_identity_channel_has_no_spread(self, ber_half):
        diag = aep_convergence_diagnostic(ber_half, make_bernoulli_duration(0.0), make_bsc_noise(0.0), [100, 1000], 5, 1)
        assert diag.std_g == (0.0, 0.0)
        assert diag.mean_g == (1.0, 1.0)

    def test_grid_validation(self, ber_half, bsc01):
        with pytest.raises(RangeError):
            aep_convergence_diagnostic(ber_half, make_bernoulli_duration(0.5), bsc01, [1000, 100], 5, 1)
        with pytest.raises(RangeError):
            aep_convergence_diagnostic(ber_half, make_bernoulli_duration(0.5), bsc01, [100], 1, 1)

    def test_mean_stabilizes(self, ber_half, bsc01):
        diag = aep_convergence_diagnostic(ber_half, make_bernoulli_duration(0.5), bsc01, [300, 1000, 3000], 20, 6)
        assert abs(diag.mean_g[-1] - diag.mean_g[-2]) <= 2 * diag.std_g[-2]


class TestRelation:
    def test_no_duplication(self, ber_half, bsc01):
        rep = check_randomly_indexed_relation(ber_half, make_bernoulli_duration(0.0), bsc01, 20_000, 20_000, 3)
        assert rep.mean_duration == 1.0
        assert rep.abs_gap < 0.02

    def test_renewal_rate(self, ber_half, bsc01):
        t = 100_000
        dur = make_bernoulli_duration(0.5)
        rep = check_randomly_indexed_relation(ber_half, dur, bsc01, t, t, 12)
        assert abs(rep.segments_completed / t - 1 / dur.mean) < 0.01
        assert rep.abs_gap <= 0.01


class TestJumpTimes:
    def test_fair_coin(self):
        assert jump_time_entropy(make_bernoulli_duration(0.5), 1) == pytest.approx((1.0, 1.0))

    @pytest.mark.parametrize("d", [1, 7, 50])
    def test_deterministic_sum(self, d):
        assert jump_time_entropy(make_bernoulli_duration(0.0), d)[0] == 0.0

    def test_ratios_decrease(self):
        ratios = [jump_time_entropy(make_bernoulli_duration(0.5), d)[1] for d in (1, 4, 16, 64)]
        assert all(b < a for a, b in zip(ratios, ratios[1:])) and ratios[-1] < 0.1

    def test_binomial_reference(self):
        d, pd = 30, 0.3
        pmf = jump_time_pmf(make_bernoulli_duration(pd), d)
        ref = stats.binom.pmf(np.arange(d + 1), d, pd)
        np.testing.assert_allclose(pmf[d : 2 * d + 1], ref, atol=1e-14)
        assert jump_time_entropy(make_bernoulli_duration(pd), d)[0] == pytest.approx(entropy_bits(ref), abs=1e-10)


class TestConditioningBound:
    def test_randomized(self):
        rep = conditioning_bound_property_test(7, 2000)
        assert rep.passed and rep.trials == 2000

    def test_independent_uniform_case(self):
        # H(Y, A) - H(Y) = H(A) = 1 when A is a fair coin independent of Y
        py = np.array([0.2, 0.3, 0.5])
        joint = np.outer(py, [0.5, 0.5])
        assert entropy_bits(joint.ravel()) - entropy_bits(py) == pytest.approx(1.0)

    def test_deterministic_case(self):
        py = np.array([0.2, 0.3, 0.5])
        joint = np.zeros((3, 2))
        joint[:, 1] = py
        assert entropy_bits(joint.ravel()) - entropy_bits(py) == pytest.approx(0.0)
