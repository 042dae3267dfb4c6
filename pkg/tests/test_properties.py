import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import C_RAYLEIGH_10, partial_fraction_ccdf
from sicasy.artifacts import format_value
from sicasy.asymptotics import curve, g_beta, zeta
from sicasy.numerics import (
    ExpSumLaw,
    RootBracket,
    find_root,
    inverse_regularized_incomplete_gamma,
    regularized_incomplete_gamma,
)
from sicasy.sic_exact import SystemConfig, direct_moments, harmonic_numbers, moment_profile

alphas = st.floats(0.02, 3.0)
xis = st.floats(0.0, 0.95)


def _distinct(values, gap=0.05):
    v = sorted(abs(x) for x in values)
    return all(b - a > gap * b for a, b in zip(v, v[1:]))


coef_sets = st.lists(
    st.one_of(st.floats(0.05, 2.0), st.floats(-1.0, -0.05)), min_size=1, max_size=6
).filter(lambda b: any(x > 0 for x in b) and _distinct(b))


@settings(max_examples=60, deadline=None)
@given(coef_sets, st.floats(0.01, 3.0))
def test_inversion_matches_partial_fractions(b, t):
    exact = partial_fraction_ccdf(b, t)
    # the closed form itself loses digits when terms nearly cancel
    scale = max(abs(v) for v in b) / min(abs(v) for v in b)
    assume(scale < 40)
    assert ExpSumLaw(b).ccdf(t) == pytest.approx(exact, abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(coef_sets)
def test_inversion_monotone_and_one_at_zero(b):
    law = ExpSumLaw(b)
    if law.left_rate is None:
        assert law.ccdf(0.0) == 1.0
    ts = np.linspace(0.01, 2.0, 8)
    vals = np.array([law.ccdf(t) for t in ts])
    assert np.all(np.diff(vals) <= 2e-8)
    assert np.all((vals >= 0) & (vals <= 1))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 300), alphas, xis)
def test_closed_form_moments(n, alpha, xi):
    cfg = SystemConfig.scaled(n, alpha, xi)
    p = moment_profile(cfg)
    mu, var = direct_moments(cfg)
    assert np.max(np.abs(p.mu - mu)) <= 1e-10 * max(1.0, np.max(np.abs(mu)))
    assert np.max(np.abs(p.variance - var)) <= 1e-10 * max(1.0, np.max(var))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10_000), st.data())
def test_harmonic_bounds(n, data):
    j = data.draw(st.integers(1, n))
    h = harmonic_numbers(n)
    d = h[n] - h[j - 1]
    assert math.log(n / j) + 1 / n <= d + 1e-12
    assert d <= math.log(n / j) + 1 / j + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(-5, 5), st.floats(0.1, 3))
def test_root_bracket_invariant(shift, slope):
    f = lambda x: slope * x**3 + x - shift
    trace = []
    r = find_root(f, RootBracket.of(f, -10.0, 10.0), 1e-12, trace=trace)
    assert all(flo * fhi <= 0 for _, _, flo, fhi in trace)
    assert abs(f(r)) <= 1e-9 or trace[-1][1] - trace[-1][0] <= 1e-12


@settings(max_examples=60, deadline=None)
@given(alphas, xis, st.floats(1e-6, 1.0))
def test_curve_identity(alpha, xi, x):
    crv = curve(alpha, xi)
    assert float(crv.f(x)) == pytest.approx(-1 / alpha + float(g_beta(x, crv.beta)), abs=1e-12 * max(1, 1 / alpha) * 10)


@settings(max_examples=40, deadline=None)
@given(alphas, st.floats(0.0, 0.5))
def test_zeta_definition(alpha, xi):
    crv = curve(alpha, xi)
    r = zeta(crv, C_RAYLEIGH_10)
    assert 0 < r.zeta <= 1
    grid = r.zeta * np.linspace(1e-6, 1 - 1e-9, 4000)
    assert np.min(crv.f(grid)) >= C_RAYLEIGH_10 - 1e-9
    if r.zeta < 1 - 1e-6:
        assert float(crv.f(min(r.zeta * (1 + 1e-5), 1.0))) < C_RAYLEIGH_10 + 1e-9


@settings(max_examples=80, deadline=None)
@given(st.floats(0.1, 200.0), st.floats(1e-6, 1 - 1e-6))
def test_incomplete_gamma_round_trip(a, p):
    x = inverse_regularized_incomplete_gamma(a, p)
    assert regularized_incomplete_gamma(a, x) == pytest.approx(p, rel=1e-10)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_number_format(v):
    s = format_value(v)
    assert float(s) == pytest.approx(v, rel=1e-11, abs=0)
    mant = s.lower().split("e")[0].replace("-", "").replace(".", "").lstrip("0")
    assert len(mant) <= 12
