import math

import numpy as np
import pytest
from scipy import stats

from affine_bernstein.model import ModelParams, derive
from affine_bernstein.sde import (BLOCK_SIZE, PathSet, Scheme, SimConfig, hitting_stats,
                                  simulate_ou, simulate_s, simulate_x, simulate_z)

CIR = ModelParams.from_delta(2.0, 1.0, 3.0, 1.0)


class TestSimConfig:
    def test_grid_exact_division(self):
        g = SimConfig(n_paths=1, t_max=1.0, dt=0.1).time_grid()
        assert g.size == 11 and g[-1] == 1.0

    def test_grid_partial_final_step(self):
        g = SimConfig(n_paths=1, t_max=1.0, dt=0.3).time_grid()
        assert np.allclose(g, [0, 0.3, 0.6, 0.9, 1.0])

    @pytest.mark.parametrize("kw", [dict(n_paths=0), dict(n_paths=2.5), dict(t_max=0.0),
                                    dict(dt=0.0), dict(dt=2.0), dict(seed=-1),
                                    dict(record_every=0), dict(record_times=(0.55,))])
    def test_rejects(self, kw):
        base = dict(n_paths=10, t_max=1.0, dt=0.1)
        with pytest.raises(ValueError):
            SimConfig(**{**base, **kw})

    def test_record_indices(self):
        cfg = SimConfig(n_paths=1, t_max=1.0, dt=0.1, record_every=4, record_times=(0.3,))
        assert cfg.record_indices().tolist() == [0, 3, 4, 8, 10]

    def test_round_trip(self):
        cfg = SimConfig(n_paths=7, t_max=2.0, dt=0.25, seed=9, scheme=Scheme.EXACT, record_times=(0.5,))
        assert SimConfig.from_dict(cfg.to_dict()) == cfg


class TestDeterminism:
    def test_same_seed_same_paths(self):
        cfg = SimConfig(n_paths=50, t_max=1.0, dt=0.01, seed=3)
        a, b = simulate_x(CIR, cfg), simulate_x(CIR, cfg)
        assert np.array_equal(a.values, b.values)

    def test_thread_count_invariant(self):
        cfg = SimConfig(n_paths=2 * BLOCK_SIZE + 17, t_max=0.2, dt=0.05, seed=11)
        p = ModelParams.from_delta(2.0, 1.0, 1.0, 0.25)
        a, b = simulate_x(p, cfg, workers=1), simulate_x(p, cfg, workers=4)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.hit_time, b.hit_time, equal_nan=True)

    def test_different_seed_differs(self):
        a = simulate_x(CIR, SimConfig(n_paths=20, t_max=1.0, dt=0.1, seed=1))
        b = simulate_x(CIR, SimConfig(n_paths=20, t_max=1.0, dt=0.1, seed=2))
        assert not np.array_equal(a.values, b.values)

    def test_readonly(self):
        ps = simulate_x(CIR, SimConfig(n_paths=5, t_max=1.0, dt=0.5))
        with pytest.raises(ValueError):
            ps.values[0, 0] = 1.0


class TestX:
    @pytest.mark.parametrize("scheme", list(Scheme))
    def test_nonnegative_and_start(self, scheme):
        p = ModelParams.from_delta(2.0, 1.0, 0.5, 0.25)
        ps = simulate_x(p, SimConfig(n_paths=500, t_max=1.0, dt=0.01, scheme=scheme))
        assert np.all(ps.values >= 0)
        assert np.all(ps.values[:, 0] == 0.25)

    @pytest.mark.parametrize("scheme", list(Scheme))
    def test_cir_mean(self, scheme):
        ps = simulate_x(CIR, SimConfig(n_paths=50_000, t_max=1.0, dt=0.01, seed=5, scheme=scheme))
        x = ps.at(1.0)
        expected = math.exp(-1) + 3 * (1 - math.exp(-1))  # 2.2642
        assert abs(x.mean() - expected) < 4 * x.std() / math.sqrt(x.size)

    def test_absorbed_paths_stay_at_zero(self):
        p = ModelParams.from_delta(2.0, 1.0, 1.0, 0.25)
        ps = simulate_x(p, SimConfig(n_paths=2000, t_max=2.0, dt=0.01, seed=1))
        for i in np.flatnonzero(~np.isnan(ps.hit_time))[:200]:
            after = ps.times >= ps.hit_time[i]
            assert np.all(ps.values[i, after] == 0)

    def test_delta3_never_hits(self):
        ps = simulate_x(CIR, SimConfig(n_paths=2000, t_max=5.0, dt=0.01, seed=2))
        assert np.all(np.isnan(ps.hit_time))

    def test_delta_zero_absorbs_at_endpoint(self):
        p = ModelParams.from_delta(2.0, 1.0, 0.0, 0.5)
        ps = simulate_x(p, SimConfig(n_paths=2000, t_max=3.0, dt=0.1, seed=3, scheme=Scheme.EXACT))
        hit = ~np.isnan(ps.hit_time)
        assert hit.mean() > 0.5
        assert np.all(ps.values[hit, -1] == 0)

    def test_exact_hit_fraction_matches_first_passage(self):
        # with lambda = 0, X is a BESQ in the clock alpha^2 t / 4; T0 = x / (2 G), G ~ Gamma(1 - delta/2)
        delta, x0, t = 1.5, 0.5, 1.0
        p = ModelParams.from_delta(2.0, 0.0, delta, x0)
        ps = simulate_x(p, SimConfig(n_paths=40_000, t_max=t, dt=0.05, seed=4, scheme=Scheme.EXACT))
        expected = stats.gamma.sf(x0 / (2 * t), 1 - delta / 2)
        frac = hitting_stats(ps).fraction_hit
        assert abs(frac - expected) < 4 * math.sqrt(expected * (1 - expected) / 40_000)


class TestZAndS:
    def test_z_squares_to_x(self):
        cfg = SimConfig(n_paths=300, t_max=1.0, dt=0.01, seed=8)
        xs, zs = simulate_x(CIR, cfg), simulate_z(CIR, cfg)
        assert np.array_equal(zs.values * zs.values, xs.values)
        assert np.all(zs.values >= 0)

    def test_s_identity(self):
        cfg = SimConfig(n_paths=300, t_max=1.0, dt=0.01, seed=8, scheme=Scheme.EXACT)
        ss, zs = simulate_s(CIR, cfg), simulate_z(CIR, cfg)
        assert np.allclose(ss.values * zs.values * np.exp(0.5 * zs.times), 1.0, rtol=1e-14)
        assert np.all(ss.values[:, 0] == 1.0)

    def test_s_preconditions(self):
        cfg = SimConfig(n_paths=10, t_max=1.0, dt=0.5)
        with pytest.raises(ValueError):
            simulate_s(ModelParams.from_delta(2.0, 1.0, 1.0, 1.0), cfg)
        with pytest.raises(ValueError):
            simulate_s(ModelParams.from_delta(2.0, 1.0, 3.0, 0.0), cfg)


class TestOU:
    def test_moments(self):
        dp = derive(ModelParams.from_delta(2.0, 1.0, 1.0, 1.0))
        ps = simulate_ou(dp, 1.0, SimConfig(n_paths=100_000, t_max=1.0, dt=0.25, seed=6))
        y = ps.at(1.0)
        m, v = math.exp(-0.5), 1 - math.exp(-1)
        assert abs(y.mean() - m) < 4 * math.sqrt(v / y.size)
        assert abs(y.var() - v) < 4 * v * math.sqrt(2 / y.size)

    def test_lambda_zero_is_scaled_brownian(self):
        dp = derive(ModelParams.from_delta(2.0, 0.0, 1.0, 0.0))
        ps = simulate_ou(dp, 0.0, SimConfig(n_paths=50_000, t_max=2.0, dt=0.5, seed=2))
        assert stats.kstest(ps.at(2.0), stats.norm(scale=math.sqrt(2.0)).cdf).statistic < 0.01

    def test_hit_detection_brownian(self):
        # reflection principle: P(min of B on [0, t] from z0 <= 0) = 2 Phi(-z0 / sqrt(t)) in the tau clock
        dp = derive(ModelParams.from_delta(2.0, 0.0, 1.0, 0.25))
        ps = simulate_ou(dp, 0.5, SimConfig(n_paths=40_000, t_max=1.0, dt=0.2, seed=3))
        expected = 2 * stats.norm.cdf(-0.5)
        frac = hitting_stats(ps).fraction_hit
        assert abs(frac - expected) < 4 * math.sqrt(expected * (1 - expected) / 40_000)


class TestHittingStats:
    def _ps(self, hits, t_max=1.0):
        cfg = SimConfig(n_paths=len(hits), t_max=t_max, dt=t_max)
        dp = derive(CIR)
        n = len(hits)
        return PathSet("x", np.array([0.0, t_max]), np.zeros((n, 2)), np.array(hits, dtype=float), cfg, dp)

    def test_examples(self):
        h = hitting_stats(self._ps([np.nan, 0.5, 1.0, np.nan]))
        assert h.fraction_hit == 0.5 and h.n_hit == 2
        assert set(h.quantiles) == {0.1, 0.5, 0.9}
        assert h.quantiles[0.5] == pytest.approx(0.75)

    def test_no_hits(self):
        h = hitting_stats(self._ps([np.nan] * 3))
        assert h.fraction_hit == 0 and h.quantiles == {}
