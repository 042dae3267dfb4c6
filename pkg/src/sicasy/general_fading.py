"""SIC analysis for arbitrary unit-mean fading.

Finite-n means of the descending order statistics come from Beta-weighted
integrals of the inverse CCDF. In the limit ``gamma = 1/(alpha n)`` the
mean-field decoding test at quantile ``x = G(y)`` becomes

    y - (1/alpha) * int_0^y u f(u) du >= c,

and the decodable fraction is ``x* = G(y*)`` with ``y*`` the last point where
that inequality starts to hold for good.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .fading import FadingModel, GammaFading, make_gamma
from .numerics import (
    IntegrationError,
    QuadratureParams,
    RootBracket,
    beta_pdf,
    compensated_cumsum,
    find_root,
    integrate,
)

__all__ = [
    "GeneralAsymptotics",
    "OrderStatMeanProfile",
    "GammaSweep",
    "order_stat_means",
    "partial_mean_quadrature",
    "mean_inequality_margin",
    "margin_profile",
    "mean_field_fraction",
    "solve_y_star",
    "u_infinity_curve",
    "gamma_sum_rate_sweep",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class OrderStatMeanProfile:
    model: str
    n: int
    mu: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.mu))


def _order_stat_integrand(model: FadingModel, h: int, n: int):
    a, b = float(h), float(n - h + 1)

    def f(u):
        return float(model.inverse_ccdf(u) * beta_pdf(u, a, b))

    return f


def order_stat_means(model: FadingModel, n: int,
                     params: Optional[QuadratureParams] = None) -> OrderStatMeanProfile:
    """Means of ``Y_(1) >= ... >= Y_(n)`` for ``n`` i.i.d. gains.

    ``G(Y_(h))`` is the ``h``-th smallest of ``n`` uniforms, so

        mu_h = int_0^1 G^-1(u) Beta(u; h, n - h + 1) du.

    The logarithmic blow-up of ``G^-1`` at ``u = 0`` is declared to the
    integrator; extra breakpoints around the Beta mode keep narrow peaks
    (large ``n``) from being stepped over.

    Raises
    ------
    IntegrationError
        Naming the rank whose integral failed.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    params = params or QuadratureParams()
    mu = np.empty(n)
    for h in range(1, n + 1):
        m = h / (n + 1.0)
        sd = math.sqrt(m * (1.0 - m) / (n + 2.0))
        pts = [m + k * sd for k in (-12, -6, -3, 0, 3, 6, 12)]
        try:
            mu[h - 1] = integrate(_order_stat_integrand(model, h, n), 0.0, 1.0, params,
                                  singular_endpoints=("lo",), points=pts)
        except IntegrationError as exc:
            raise IntegrationError(f"order-statistic mean for rank h={h}: {exc}",
                                   exc.estimate, exc.error_bound) from exc
    return OrderStatMeanProfile(model.name, n, mu)


def partial_mean_quadrature(model: FadingModel, y: float,
                            params: Optional[QuadratureParams] = None) -> float:
    """``int_0^y u f(u) du`` by direct quadrature (cross-check for closed forms)."""
    if y <= 0:
        return 0.0
    return integrate(lambda u: float(u * model.pdf(u)), 0.0, float(y), params,
                     singular_endpoints=("lo",))


def margin_profile(model: FadingModel, n: int, alpha: float, epsilon: float = 0.1,
                   profile: Optional[OrderStatMeanProfile] = None) -> np.ndarray:
    """Mean-field margins ``mu_h - gamma sum_{i>h} mu_i - c`` for ``h = 1..n``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    prof = profile or order_stat_means(model, n)
    if prof.n != n:
        raise ValueError("profile length does not match n")
    gamma = 1.0 / (alpha * n)
    c = model.threshold(epsilon)
    suffix = np.append(compensated_cumsum(prof.mu[::-1])[::-1], 0.0)
    return prof.mu - gamma * suffix[1:] - c


def mean_inequality_margin(model: FadingModel, n: int, alpha: float, h: int,
                           epsilon: float = 0.1,
                           profile: Optional[OrderStatMeanProfile] = None) -> float:
    """Mean-field decoding margin at rank ``h``; nonnegative means decodable."""
    if int(h) != h or not 1 <= h <= n:
        raise ValueError(f"rank must lie in 1..{n}, got {h!r}")
    return float(margin_profile(model, n, alpha, epsilon, profile)[int(h) - 1])


def mean_field_fraction(margins: np.ndarray) -> float:
    """Fraction of ranks decoded before the first negative margin."""
    bad = np.flatnonzero(np.asarray(margins) < 0.0)
    k = bad[0] if bad.size else len(margins)
    return k / len(margins)


@dataclass(frozen=True)
class GeneralAsymptotics:
    model: FadingModel
    alpha: float
    epsilon: float
    c: float
    y_star: float
    x_star: float

    @property
    def u_infinity(self) -> float:
        return self.x_star / (self.alpha * LN2)


def _phi(model: FadingModel, alpha: float, c: float):
    def phi(y):
        return y - model.partial_mean(y) / alpha - c
    return phi


def solve_y_star(model: FadingModel, alpha: float, epsilon: float,
                 scan_points: int = 10_000) -> GeneralAsymptotics:
    """Smallest ``y*`` beyond which ``Phi(y) = y - (1/alpha) E[Y; Y<y] - c >= 0``.

    ``Phi(c) <= 0`` and ``Phi(c + 1/alpha) >= 0``, so ``y*`` sits in
    ``[c, c + 1/alpha]``. ``Phi`` need not be monotone, so the interval is
    scanned and the last negative-to-nonnegative change is refined.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    c = model.threshold(epsilon)
    phi = _phi(model, alpha, c)
    ys = np.linspace(c, c + 1.0 / alpha, scan_points + 1)
    vals = phi(ys)
    neg = np.flatnonzero(vals < 0.0)
    if neg.size == 0:
        y_star = c
    elif neg[-1] == ys.size - 1:
        # only roundoff can make the right end negative
        y_star = float(ys[-1])
    else:
        k = neg[-1]
        fs = lambda y: float(phi(y))
        y_star = find_root(fs, RootBracket(ys[k], ys[k + 1], vals[k], vals[k + 1]), 1e-14)
    x_star = float(model.ccdf(y_star))
    lo_x = float(model.ccdf(c + 1.0 / alpha))
    tol = 1e-12
    if not (c - tol <= y_star <= c + 1.0 / alpha + tol and lo_x - tol <= x_star <= 1 - epsilon + tol):
        raise ArithmeticError(
            f"y*={y_star!r}, x*={x_star!r} outside [c, c+1/alpha] x [G(c+1/alpha), 1-eps]")
    return GeneralAsymptotics(model, float(alpha), float(epsilon), c, float(y_star), x_star)


def u_infinity_curve(model: FadingModel, alphas: Iterable[float], epsilon: float) -> np.ndarray:
    return np.array([solve_y_star(model, a, epsilon).u_infinity for a in alphas])


@dataclass
class GammaSweep:
    """Sweep table rows ``(eta, scov, alpha, x*, U_inf)`` and per-``eta`` optima."""

    epsilon: float
    rows: list = field(default_factory=list)
    best: dict = field(default_factory=dict)  # eta -> (alpha*, U*, on_boundary)

    def column(self, eta: float) -> np.ndarray:
        return np.array([r[4] for r in self.rows if r[0] == eta])


def _golden_max(fn, lo, hi, tol=1e-7):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = hi - g * (hi - lo), lo + g * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = fn(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = fn(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def gamma_sum_rate_sweep(etas: Sequence[float], alphas: Sequence[float], epsilon: float,
                         refine: bool = True) -> GammaSweep:
    """Asymptotic sum-rate of Gamma fading over an ``(eta, alpha)`` grid.

    For each ``eta`` the grid maximum is reported, refined by golden section
    between its neighbours when ``refine`` is set. ``on_boundary`` flags a
    maximum that sits at either end of the grid.
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size == 0 or np.any(alphas <= 0):
        raise ValueError("alpha grid must be nonempty and positive")
    out = GammaSweep(epsilon)
    for eta in etas:
        model = make_gamma(eta)
        u = u_infinity_curve(model, alphas, epsilon)
        for a, val in zip(alphas, u):
            out.rows.append((float(eta), model.scov, float(a), float(val * a * LN2), float(val)))
        k = int(np.argmax(u))
        a_best, u_best = float(alphas[k]), float(u[k])
        if refine and 0 < k < alphas.size - 1:
            fn = lambda a: solve_y_star(model, a, epsilon).u_infinity
            a_r, u_r = _golden_max(fn, alphas[k - 1], alphas[k + 1])
            if u_r > u_best:
                a_best, u_best = float(a_r), float(u_r)
        out.best[float(eta)] = (a_best, u_best, k in (0, alphas.size - 1))
    return out
