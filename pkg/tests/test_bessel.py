import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from affine_bernstein.bessel import (BesqSpec, besq_no_hit_probability, besq_scaling_check,
                                     besq_step, besq_transition_sample, sample_x_exact,
                                     time_change)
from affine_bernstein.model import DomainError, ModelParams, derive


def dp_of(alpha, lam, delta, x0=1.0):
    return derive(ModelParams.from_delta(alpha, lam, delta, x0))


class TestTimeChange:
    def test_examples(self):
        assert time_change(dp_of(2, 1, 3), 1.0) == pytest.approx(math.e - 1, rel=1e-14)
        assert time_change(dp_of(2, 0, 3), 1.0) == 1.0
        assert time_change(dp_of(2, 1, 3), 0.0) == 0.0

    def test_continuous_in_lambda(self):
        base = time_change(dp_of(1.5, 0, 1), 2.0)
        for lam in (1e-6, -1e-6):
            assert time_change(dp_of(1.5, lam, 1), 2.0) == pytest.approx(base, rel=1e-5)

    def test_increasing(self):
        for lam in (-2.0, 0.0, 3.0):
            tau = time_change(dp_of(1.0, lam, 1), np.linspace(0, 5, 200))
            assert np.all(np.diff(tau) > 0)

    def test_rejects_negative_time(self):
        with pytest.raises(DomainError):
            time_change(dp_of(2, 1, 3), -0.1)


class TestTransition:
    def test_spec_validation(self):
        with pytest.raises(ValueError):
            BesqSpec(-1, 1)
        with pytest.raises(ValueError):
            BesqSpec(1, -1)

    def test_matches_noncentral_chi2(self):
        # oracle: BESQ^delta_h from x is h times a noncentral chi-square(delta, x/h)
        rng = np.random.default_rng(0)
        for delta, y0, h in ((1.0, 0.0, 1.0), (3.0, 2.0, 0.5), (1.7, 1.0, 2.0)):
            s = besq_transition_sample(BesqSpec(delta, y0), h, rng, size=50_000)
            if y0 == 0:
                cdf = lambda v: stats.chi2.cdf(v / h, delta)
            else:
                cdf = lambda v: stats.ncx2.cdf(v / h, delta, y0 / h)
            assert stats.kstest(s, cdf).statistic < 0.01

    def test_mean(self):
        rng = np.random.default_rng(1)
        s = besq_step(2.5, np.full(200_000, 1.5), 0.8, rng)
        se = s.std() / math.sqrt(s.size)
        assert abs(s.mean() - (1.5 + 2.5 * 0.8)) < 4 * se

    def test_delta0_atom(self):
        rng = np.random.default_rng(2)
        s = besq_step(0.0, np.full(100_000, 1.0), 1.0, rng)
        assert np.all(s >= 0)
        # P(Y_h = 0) = exp(-x / (2h))
        assert abs((s == 0).mean() - math.exp(-0.5)) < 0.01

    def test_scalar_and_bad_step(self):
        rng = np.random.default_rng(3)
        assert isinstance(besq_transition_sample(BesqSpec(3, 1), 1.0, rng), float)
        with pytest.raises(ValueError):
            besq_transition_sample(BesqSpec(3, 1), 0.0, rng)


class TestBridge:
    def test_delta1_is_tanh(self):
        x, y, h = 0.7, 1.3, 0.4
        assert besq_no_hit_probability(1.0, x, y, h) == pytest.approx(math.tanh(math.sqrt(x * y) / h))

    def test_delta1_reflection_principle(self):
        # delta = 1: BESQ is B^2; a Brownian bridge a -> b avoids 0 w.p. 1 - exp(-2ab/h)
        # and its reflected image contributes in proportion to the two endpoint densities
        a, b, h = 0.6, 0.9, 0.5
        pp = math.exp(-(b - a) ** 2 / (2 * h))
        pm = math.exp(-(b + a) ** 2 / (2 * h))
        no_hit = (pp - pm) / (pp + pm)
        assert besq_no_hit_probability(1.0, a * a, b * b, h) == pytest.approx(no_hit, rel=1e-12)

    @pytest.mark.parametrize("delta", [0.3, 1.0, 1.5])
    @pytest.mark.parametrize("x, h", [(0.5, 1.0), (2.0, 0.7)])
    def test_integrates_to_first_passage_law(self, delta, x, h):
        # T0 under BESQ^delta from x is x / (2 G) with G ~ Gamma(1 - delta/2)
        mu = 1 - delta / 2
        expected = special.gammaincc(mu, x / (2 * h))

        def integrand(y):
            dens = stats.ncx2.pdf(y / h, delta, x / h) / h
            return dens * (1.0 - besq_no_hit_probability(delta, x, y, h))
        hit_cont, _ = integrate.quad(integrand, 0, np.inf, limit=400)
        # for delta < 2 there is no atom at 0 except delta = 0, so all mass is continuous
        assert hit_cont == pytest.approx(expected, rel=1e-6, abs=1e-9)

    def test_polar_and_absorbing(self):
        assert np.all(besq_no_hit_probability(2.0, np.array([0.0, 1.0]), np.array([0.0, 2.0]), 1.0) == 1)
        assert np.all(besq_no_hit_probability(3.5, 0.1, 0.1, 5.0) == 1)
        assert np.array_equal(besq_no_hit_probability(0.0, np.array([1.0, 1.0]), np.array([0.0, 0.5]), 1.0),
                              [0.0, 1.0])

    def test_zero_endpoint_is_hit(self):
        assert besq_no_hit_probability(1.5, 1.0, 0.0, 1.0) == 0
        assert besq_no_hit_probability(1.0, 0.0, 1.0, 1.0) == 0

    def test_large_argument_stable(self):
        p = besq_no_hit_probability(1.3, np.array([1e6]), np.array([1e6]), 1e-3)
        assert np.isfinite(p).all() and p[0] == pytest.approx(1.0)


class TestScaling:
    @pytest.mark.parametrize("delta, y0, c", [(1.0, 1.0, 1.0), (3.0, 0.0, 4.0), (1.7, 2.0, 0.5)])
    def test_scaling_holds(self, delta, y0, c):
        rep = besq_scaling_check(BesqSpec(delta, y0), c, 1.0, 20_000, seed=7)
        assert rep.passed, rep.to_dict()

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            besq_scaling_check(BesqSpec(1, 1), 2.0, 1.0, 999)


class TestSampleX:
    def test_shapes_and_start(self):
        dp = dp_of(2, 1, 3, x0=1.0)
        rng = np.random.default_rng(0)
        one = sample_x_exact(dp, [0.0, 0.5, 1.0], rng)
        many = sample_x_exact(dp, [0.0, 0.5, 1.0], rng, n_paths=10)
        assert one.shape == (3,) and many.shape == (10, 3)
        assert one[0] == 1.0 and np.all(many[:, 0] == 1.0)

    def test_cir_mean(self):
        dp = dp_of(2, 1, 3, x0=1.0)
        x = sample_x_exact(dp, [1.0], np.random.default_rng(4), n_paths=200_000)[:, 0]
        expected = math.exp(-1) + 3 * (1 - math.exp(-1))
        assert abs(x.mean() - expected) < 4 * x.std() / math.sqrt(x.size)

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            sample_x_exact(dp_of(2, 1, 3), [1.0, 0.5], np.random.default_rng(0))
