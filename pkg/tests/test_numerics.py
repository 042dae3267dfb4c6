import math

import numpy as np
import pytest
from scipy import special

from oracles import C_RAYLEIGH_10, partial_fraction_ccdf, stationary_scan
from sicasy.numerics import (
    BracketError,
    ExpSumLaw,
    IntegrationError,
    InversionError,
    InversionParams,
    QuadratureParams,
    RootBracket,
    beta_pdf,
    compensated_cumsum,
    find_root,
    integrate,
    inverse_regularized_incomplete_gamma,
    invert_ccdf,
    log1p_complex,
    regularized_incomplete_gamma,
)


class TestParams:
    def test_defaults(self):
        p = InversionParams()
        assert p.target_relative_error == 1e-8
        assert p.series_terms >= p.euler_acceleration_depth >= 1
        assert p.discretization == pytest.approx(18.42, abs=0.01)

    @pytest.mark.parametrize("kw", [
        {"target_relative_error": 0.0},
        {"target_relative_error": 0.05},
        {"series_terms": 3, "euler_acceleration_depth": 5},
        {"euler_acceleration_depth": 0},
    ])
    def test_inversion_invalid(self, kw):
        with pytest.raises(ValueError):
            InversionParams(**kw)

    @pytest.mark.parametrize("kw", [{"abs_tol": 0.0}, {"rel_tol": -1.0}, {"max_subdivisions": 8}])
    def test_quadrature_invalid(self, kw):
        with pytest.raises(ValueError):
            QuadratureParams(**kw)

    def test_bracket_validation(self):
        with pytest.raises(ValueError):
            RootBracket(1.0, 0.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            RootBracket(0.0, 1.0, 1.0, 2.0)
        RootBracket(0.0, 1.0, 0.0, 2.0)


class TestInversion:
    def test_unit_exponential(self):
        p = invert_ccdf(lambda s: 1.0 / (1.0 + s), C_RAYLEIGH_10)
        assert p == pytest.approx(0.9, rel=1e-8)

    def test_ccdf_at_zero(self):
        assert invert_ccdf(lambda s: 1.0 / (1.0 + s) ** 2, 0.0) == 1.0

    def test_erlang_tail(self):
        t = 2.5
        exact = math.exp(-t) * (1 + t)
        assert invert_ccdf(lambda s: (1.0 + s) ** -2, t, right_rate=1.0) == pytest.approx(exact, rel=1e-8)

    def test_deep_tail_relative_accuracy(self):
        law = ExpSumLaw([1.0 / 200])
        assert law.ccdf(C_RAYLEIGH_10) == pytest.approx(0.9**200, rel=1e-8)

    def test_negative_threshold_needs_two_sided(self):
        with pytest.raises(ValueError):
            invert_ccdf(lambda s: 1.0 / (1.0 + s), -1.0)

    def test_two_sided_small_example(self):
        # n = 5, alpha = 0.32, rank 1: coefficients of both signs
        gamma = 1 / (0.32 * 5)
        b = [(1 + gamma) / k - gamma for k in range(1, 6)]
        law = ExpSumLaw(b)
        assert law.left_rate is not None
        exact = partial_fraction_ccdf(b, C_RAYLEIGH_10)
        assert law.ccdf(C_RAYLEIGH_10) == pytest.approx(exact, abs=1e-7)
        assert exact == pytest.approx(0.629186982961, abs=1e-11)

    def test_two_sided_negative_threshold(self):
        b = [1.0, -0.5]
        t = -0.3
        # P(X1 - X2/2 >= t) for t < 0: 1 - P(V < t), V<t only via the negative part
        exact = 1.0 - (0.5 / 1.5) * math.exp(t / 0.5)
        assert ExpSumLaw(b).ccdf(t) == pytest.approx(exact, abs=1e-8)

    @pytest.mark.parametrize("b", [
        [1.0, 0.5, 0.25],
        [0.9, 0.3, -0.2, -0.05],
        [2.0, -1.0, 0.6, 0.1, -0.3, 0.45],
        [0.2, 0.19, 0.05, -0.01, -0.02],
    ])
    @pytest.mark.parametrize("t", [0.05, 0.4, 1.5])
    def test_partial_fraction_agreement(self, b, t):
        assert ExpSumLaw(b).ccdf(t) == pytest.approx(partial_fraction_ccdf(b, t), abs=1e-7)

    def test_monotone_in_threshold(self):
        law = ExpSumLaw([0.8, 0.4, -0.1])
        ts = np.linspace(0.0, 3.0, 31)
        vals = [law.ccdf(t) for t in ts]
        assert np.all(np.diff(vals) <= 1e-9)

    def test_nonconvergence_raises(self):
        params = InversionParams(series_terms=2, euler_acceleration_depth=2, max_series_terms=2)
        with pytest.raises(InversionError) as ei:
            invert_ccdf(lambda s: np.exp(-np.sqrt(s)) , 1e-3, params)
        assert "failed to converge" in str(ei.value)
        assert ei.value.remainder >= 0

    def test_law_moments(self):
        law = ExpSumLaw([1.0, -0.5, 0.0, 0.25])
        assert law.coefficients.size == 3
        assert law.mean == pytest.approx(0.75)
        assert law.variance == pytest.approx(1.3125)

    def test_log1p_complex_small(self):
        z = np.array([1e-12 + 1e-13j, -3e-9j])
        np.testing.assert_allclose(log1p_complex(z), z - z * z / 2, rtol=1e-12)


class TestRootFinding:
    def test_linear(self):
        f = lambda x: x - 0.5
        assert find_root(f, RootBracket.of(f, 0.0, 1.0)) == pytest.approx(0.5, abs=1e-12)

    def test_stationary_points(self):
        f = lambda x: 0.32 + x * math.log(x)
        oracle = stationary_scan(0.32)
        x1 = find_root(f, RootBracket.of(f, 1e-6, 1 / math.e))
        x2 = find_root(f, RootBracket.of(f, 1 / math.e, 1.0))
        assert x1 == pytest.approx(oracle[0], abs=2e-6)
        assert x2 == pytest.approx(oracle[1], abs=2e-6)
        assert x1 == pytest.approx(0.199, abs=3e-3)
        assert x2 == pytest.approx(0.57, abs=5e-3)

    def test_bracket_straddles_every_iteration(self):
        f = lambda x: math.cos(x) - x
        trace = []
        find_root(f, RootBracket.of(f, 0.0, 1.0), 1e-14, trace=trace)
        assert trace
        for lo, hi, flo, fhi in trace:
            assert lo <= hi and flo * fhi <= 0

    def test_invalid_bracket(self):
        with pytest.raises(BracketError):
            RootBracket.of(lambda x: x * x + 1, -1.0, 1.0)

    def test_deterministic(self):
        f = lambda x: x**3 - 2
        b = RootBracket.of(f, 0.0, 2.0)
        assert find_root(f, b) == find_root(f, b)


class TestQuadrature:
    def test_log_singularity(self):
        v = integrate(lambda u: -math.log(u), 0.0, 1.0, singular_endpoints=("lo",))
        assert v == pytest.approx(1.0, abs=1e-10)

    def test_constant(self):
        assert integrate(lambda u: 1.0, 0.0, 1.0) == pytest.approx(1.0, abs=1e-14)

    def test_beta_weighted_order_statistic(self):
        v = integrate(lambda u: -math.log(u) * float(beta_pdf(u, 2, 4)), 0.0, 1.0,
                      singular_endpoints=("lo",))
        assert v == pytest.approx(1 / 2 + 1 / 3 + 1 / 4 + 1 / 5, abs=1e-10)

    def test_budget_exhausted(self):
        params = QuadratureParams(max_subdivisions=16)
        with pytest.raises(IntegrationError) as ei:
            integrate(lambda u: math.sin(1.0 / u) / u, 1e-4, 1.0, params)
        assert math.isfinite(ei.value.estimate)

    def test_unknown_flag(self):
        with pytest.raises(ValueError):
            integrate(lambda u: 1.0, 0.0, 1.0, singular_endpoints=("middle",))


class TestSpecialFunctions:
    def test_exponential_case(self):
        assert regularized_incomplete_gamma(1.0, C_RAYLEIGH_10) == pytest.approx(0.1, rel=1e-12)
        assert inverse_regularized_incomplete_gamma(1.0, 0.1) == pytest.approx(C_RAYLEIGH_10, rel=1e-12)

    def test_integer_shape(self):
        oracle = integrate(lambda u: u * math.exp(-u), 0.0, 1.0)
        assert regularized_incomplete_gamma(2.0, 1.0) == pytest.approx(oracle, rel=1e-10)
        assert oracle == pytest.approx(1 - 2 / math.e, rel=1e-12)

    @pytest.mark.parametrize("a", [0.1, 0.5, 1.0, 3.7, 40.0, 1e4])
    @pytest.mark.parametrize("p", [1e-6, 0.01, 0.5, 0.9, 1 - 1e-6])
    def test_round_trip(self, a, p):
        x = inverse_regularized_incomplete_gamma(a, p)
        assert regularized_incomplete_gamma(a, x) == pytest.approx(p, rel=1e-10)

    @pytest.mark.parametrize("args", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
    def test_domain(self, args):
        with pytest.raises(ValueError):
            regularized_incomplete_gamma(*args)

    def test_inverse_domain(self):
        with pytest.raises(ValueError):
            inverse_regularized_incomplete_gamma(1.0, 1.0)

    def test_beta_pdf_normalised(self):
        v = integrate(lambda u: float(beta_pdf(u, 3.5, 200.0)), 0.0, 1.0, points=[0.017])
        assert v == pytest.approx(1.0, abs=1e-9)

    def test_compensated_cumsum(self):
        x = np.full(10**6, 0.1)
        assert compensated_cumsum(x)[-1] == pytest.approx(1e5, rel=1e-15)
        np.testing.assert_allclose(compensated_cumsum([1.0, 2.0, 3.0]), [1.0, 3.0, 6.0])
