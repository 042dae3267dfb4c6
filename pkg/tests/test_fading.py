import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import C_RAYLEIGH_10
from sicasy.fading import (
    GammaFading,
    PowerRandomization,
    Rayleigh,
    TwoLevelRayleigh,
    calibrate,
    make_gamma,
    make_rayleigh,
    make_two_level,
    parse_model,
    sample_exponential_spacings,
    sample_gain_matrix,
    sample_gains,
    spacings_to_order_statistics,
)

MODELS = [make_rayleigh(), make_gamma(0.5), make_gamma(2.0), make_two_level(3.0)]


def test_rayleigh_calibration():
    thr = calibrate(make_rayleigh(), 0.1)
    assert thr.c == pytest.approx(0.10536051565782628, rel=1e-14)
    assert thr.s0_over_gamma == pytest.approx(1 / thr.c)


def test_gamma_one_is_rayleigh():
    r, g = make_rayleigh(), make_gamma(1.0)
    t = np.linspace(0, 6, 25)
    np.testing.assert_allclose(g.ccdf(t), r.ccdf(t), atol=1e-15)
    np.testing.assert_allclose(g.partial_mean(t), r.partial_mean(t), atol=1e-15)
    assert g.threshold(0.1) == pytest.approx(r.threshold(0.1), rel=1e-13)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_inverse_round_trip(model):
    u = np.array([1e-12, 1e-4, 0.1, 0.5, 0.9, 1 - 1e-9])
    np.testing.assert_allclose(model.ccdf(model.inverse_ccdf(u)), u, rtol=1e-9)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_threshold_meets_outage(model):
    for eps in (0.05, 0.1, 0.3):
        assert model.cdf(model.threshold(eps)) == pytest.approx(eps, rel=1e-10)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.name)
def test_partial_mean_tends_to_one(model):
    assert float(model.partial_mean(1e4)) == pytest.approx(1.0, abs=1e-12)


def test_scov():
    assert make_gamma(4).scov == 0.25
    assert make_two_level(1.0).scov == pytest.approx(1.0)
    assert make_two_level(2.0).scov == pytest.approx(2.0)


def test_power_randomization_unit_mean():
    for b in (1, 2, 3.5, 10):
        assert PowerRandomization(b).exact_mean() == Fraction(1)


def test_two_level_sample_moments():
    m = make_two_level(3.0)
    y = m.sample(np.random.default_rng(0), 400_000)
    assert y.mean() == pytest.approx(1.0, abs=5e-3)
    assert y.var() == pytest.approx(m.scov, rel=0.03)


@pytest.mark.parametrize("text,cls", [("rayleigh", Rayleigh), ("gamma:2", GammaFading),
                                      ("Two-Level:3", TwoLevelRayleigh)])
def test_parse_model(text, cls):
    assert isinstance(parse_model(text), cls)


@pytest.mark.parametrize("text", ["weibull:2", "gamma", "gamma:x", "gamma:-1", "two-level:0.5"])
def test_parse_model_rejects(text):
    with pytest.raises(ValueError):
        parse_model(text)


def test_calibrate_domain():
    with pytest.raises(ValueError):
        calibrate(make_rayleigh(), 1.0)


def test_sorted_descending_and_seeded():
    a = sample_gains(make_gamma(2), 50, 7)
    b = sample_gains(make_gamma(2), 50, 7)
    assert np.array_equal(a, b)
    assert np.all(np.diff(a) <= 0)
    m = sample_gain_matrix(make_rayleigh(), 10, 100, 1)
    assert m.shape == (100, 10) and np.all(np.diff(m, axis=1) <= 0)


def test_spacings_representation():
    x = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(spacings_to_order_statistics(x), [1 + 1 + 1, 1 + 1, 1])
    y = sample_exponential_spacings(20, 3)
    assert np.all(np.diff(y) <= 0)


def test_spacings_match_sorted_sample_in_mean():
    rng = np.random.default_rng(5)
    x = rng.exponential(size=(200_000, 5))
    y = spacings_to_order_statistics(x).mean(axis=0)
    z = -np.sort(-rng.exponential(size=(200_000, 5)), axis=1).mean(axis=0)
    np.testing.assert_allclose(y, z, atol=0.01)
