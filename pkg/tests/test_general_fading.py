import math

import numpy as np
import pytest

from oracles import C_RAYLEIGH_10, harmonic
from sicasy.asymptotics import zeta_of_alpha
from sicasy.fading import make_gamma, make_rayleigh, make_two_level, sample_gain_matrix
from sicasy.general_fading import (
    gamma_sum_rate_sweep,
    margin_profile,
    mean_field_fraction,
    mean_inequality_margin,
    order_stat_means,
    partial_mean_quadrature,
    solve_y_star,
)

RAY = make_rayleigh()


class TestOrderStatMeans:
    def test_rayleigh_example(self):
        mu = order_stat_means(RAY, 5).mu
        assert mu[1] == pytest.approx(1 / 2 + 1 / 3 + 1 / 4 + 1 / 5, abs=1e-10)

    @pytest.mark.parametrize("model", [RAY, make_gamma(0.5), make_gamma(3), make_two_level(2)],
                             ids=lambda m: m.name)
    def test_single_and_sum(self, model):
        assert order_stat_means(model, 1).mu[0] == pytest.approx(1.0, abs=1e-9)
        p = order_stat_means(model, 12)
        assert p.total == pytest.approx(12, abs=1e-6)
        assert np.all(np.diff(p.mu) < 0) and p.mu[-1] > 0

    def test_gamma_sum(self):
        assert order_stat_means(make_gamma(2), 4).total == pytest.approx(4, abs=1e-6)

    def test_rayleigh_closed_form_large_n(self):
        n = 400
        mu = order_stat_means(RAY, n).mu
        h = np.cumsum(1 / np.arange(1, n + 1))
        oracle = h[-1] - np.concatenate([[0], h[:-1]])
        np.testing.assert_allclose(mu, oracle, atol=1e-7)

    def test_monte_carlo(self):
        model = make_two_level(3)
        n, R = 16, 100_000
        y = sample_gain_matrix(model, n, R, 3)
        se = y.std(axis=0) / math.sqrt(R)
        mu = order_stat_means(model, n).mu
        assert np.all(np.abs(y.mean(axis=0) - mu) <= 4 * se)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            order_stat_means(RAY, 0)


class TestMargins:
    def test_single_node(self):
        assert mean_inequality_margin(RAY, 1, 0.7, 1) == pytest.approx(1 - C_RAYLEIGH_10, abs=1e-9)

    def test_sign_by_rank(self):
        prof = order_stat_means(RAY, 500)
        assert mean_inequality_margin(RAY, 500, 0.32, 250, profile=prof) > 0
        assert mean_inequality_margin(RAY, 500, 0.32, 475, profile=prof) < 0

    def test_rank_range(self):
        with pytest.raises(ValueError):
            mean_inequality_margin(RAY, 10, 0.3, 11)

    def test_matches_v_means_for_rayleigh(self):
        from sicasy.sic_exact import SystemConfig, moment_profile

        m = margin_profile(RAY, 60, 0.32)
        mu = moment_profile(SystemConfig.scaled(60, 0.32)).mu
        np.testing.assert_allclose(m, mu - C_RAYLEIGH_10, atol=1e-9)

    @pytest.mark.slow
    def test_mean_field_fraction_converges(self):
        x_star = solve_y_star(RAY, 0.32, 0.1).x_star
        dist = [abs(mean_field_fraction(margin_profile(RAY, n, 0.32)) - x_star)
                for n in (100, 400, 1600)]
        assert dist[0] > dist[1] > dist[2]


class TestYStar:
    def test_rayleigh_reduction(self):
        g = solve_y_star(RAY, 0.32, 0.1)
        assert g.x_star == pytest.approx(zeta_of_alpha(0.32, 0.0, C_RAYLEIGH_10), abs=1e-4)
        assert g.u_infinity == pytest.approx(g.x_star / (0.32 * math.log(2)))

    def test_gamma_one(self):
        a = solve_y_star(make_gamma(1.0), 0.45, 0.1).x_star
        b = solve_y_star(RAY, 0.45, 0.1).x_star
        assert a == pytest.approx(b, abs=1e-8)

    @pytest.mark.parametrize("model", [make_gamma(1e4), make_gamma(0.3), make_two_level(4)],
                             ids=lambda m: m.name)
    @pytest.mark.parametrize("alpha", [0.1, 0.32, 1.0, 3.0])
    def test_bounds(self, model, alpha):
        g = solve_y_star(model, alpha, 0.1)
        assert g.c <= g.y_star <= g.c + 1 / alpha
        assert float(model.ccdf(g.c + 1 / alpha)) <= g.x_star + 1e-12 <= 0.9 + 2e-12

    def test_near_deterministic_gain(self):
        # with every gain close to 1 the whole mean of Y sits just above c,
        # so the tail condition only settles at c + 1/alpha and nothing is decodable
        m = make_gamma(1e4)
        for alpha in (0.32, 1.5):
            g = solve_y_star(m, alpha, 0.1)
            assert g.y_star == pytest.approx(g.c + 1 / alpha, abs=1e-3)
            assert g.x_star < 1e-6

    @pytest.mark.parametrize("eta", [0.5, 2.0, 7.0])
    @pytest.mark.parametrize("y", [0.05, 0.7, 3.0])
    def test_partial_mean_two_ways(self, eta, y):
        m = make_gamma(eta)
        assert partial_mean_quadrature(m, y) == pytest.approx(float(m.partial_mean(y)), abs=1e-8)

    def test_invalid(self):
        with pytest.raises(ValueError):
            solve_y_star(RAY, -1.0, 0.1)
        with pytest.raises(ValueError):
            solve_y_star(RAY, 1.0, 1.2)


class TestGammaSweep:
    def test_sweep(self):
        alphas = np.linspace(0.05, 1.5, 59)
        sw = gamma_sum_rate_sweep([4, 2, 1, 0.5], alphas, 0.1)
        ray = [solve_y_star(RAY, a, 0.1).u_infinity for a in alphas]
        np.testing.assert_allclose(sw.column(1.0), ray, atol=1e-6)
        peaks = [sw.best[e][1] for e in (4.0, 2.0, 1.0, 0.5)]
        assert all(b >= a for a, b in zip(peaks, peaks[1:]))
        assert not any(sw.best[e][2] for e in sw.best)

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            gamma_sum_rate_sweep([1.0], [], 0.1)
