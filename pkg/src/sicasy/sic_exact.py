"""Exact finite-n analysis of SIC under Rayleigh fading.

With descending exponential order statistics written through independent
spacings, ``Y_(k) = sum_{j>=k} X_j / j``, the rank-``j`` decoding test
reduces to ``V_j >= c`` where ``V_j = sum_k b_jk X_k`` is a linear form in
i.i.d. unit exponentials. This module builds the coefficients, the closed-form
mean and variance of every ``V_j``, and ``P(V_j >= c)`` by Laplace inversion.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .fading import CalibratedThreshold, calibrate, make_rayleigh
from .numerics import ExpSumLaw, InversionParams, compensated_cumsum

__all__ = [
    "SystemConfig",
    "SicCoefficients",
    "MomentProfile",
    "TransitionProfile",
    "coefficients",
    "coefficient_matrix",
    "direct_moments",
    "harmonic_numbers",
    "moment_profile",
    "mean_deviation",
    "mean_deviation_bound",
    "pv_curve",
    "transition_profile",
    "thread_count",
]


def thread_count(default: Optional[int] = None) -> int:
    """Worker cap from ``SICASY_THREADS`` (falls back to the CPU count)."""
    env = os.environ.get("SICASY_THREADS")
    if env:
        try:
            k = int(env)
        except ValueError:
            raise ValueError(f"SICASY_THREADS must be an integer, got {env!r}") from None
        return max(1, k)
    if default is not None:
        return max(1, int(default))
    return max(1, os.cpu_count() or 1)


@dataclass(frozen=True)
class SystemConfig:
    """``n`` concurrent packets, target SNIR ``gamma``, residual fraction ``xi``."""

    n: int
    gamma: float
    xi: float = 0.0
    threshold: CalibratedThreshold = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if not 0.0 <= self.xi < 1.0:
            raise ValueError(f"xi must lie in [0, 1), got {self.xi!r}")
        if self.threshold is None:
            object.__setattr__(self, "threshold", calibrate(make_rayleigh(), 0.1))

    @classmethod
    def scaled(cls, n: int, alpha: float, xi: float = 0.0, epsilon: float = 0.1,
               model=None) -> "SystemConfig":
        """Configuration with ``gamma = 1 / (alpha n)``."""
        if not alpha > 0:
            raise ValueError(f"alpha must be positive, got {alpha!r}")
        thr = calibrate(model or make_rayleigh(), epsilon)
        return cls(n, 1.0 / (alpha * n), xi, thr)

    @classmethod
    def with_gamma(cls, n: int, gamma: float, xi: float = 0.0, epsilon: float = 0.1,
                   model=None) -> "SystemConfig":
        return cls(n, gamma, xi, calibrate(model or make_rayleigh(), epsilon))

    @property
    def alpha(self) -> float:
        return 1.0 / (self.gamma * self.n)

    @property
    def c(self) -> float:
        return self.threshold.c

    @property
    def epsilon(self) -> float:
        return self.threshold.epsilon


@dataclass(frozen=True)
class SicCoefficients:
    j: int
    row: np.ndarray

    @property
    def law(self) -> ExpSumLaw:
        return ExpSumLaw(self.row)


def _check_rank(config: SystemConfig, j: int) -> int:
    if int(j) != j or not 1 <= j <= config.n:
        raise ValueError(f"rank must lie in 1..{config.n}, got {j!r}")
    return int(j)


def _lead(config: SystemConfig, j):
    """``1 + j gamma - (j - 1) gamma xi``, the numerator of the ``k >= j`` entries."""
    g, xi = config.gamma, config.xi
    return 1.0 + g * (xi + (1.0 - xi) * np.asarray(j, dtype=float))


def coefficients(config: SystemConfig, j: int) -> SicCoefficients:
    """Row ``b_j1 .. b_jn`` of the linear form ``V_j``."""
    j = _check_rank(config, j)
    k = np.arange(1, config.n + 1, dtype=float)
    row = np.where(k < j, -config.gamma * config.xi, _lead(config, j) / k - config.gamma)
    return SicCoefficients(j, row)


def coefficient_matrix(config: SystemConfig) -> np.ndarray:
    n = config.n
    j = np.arange(1, n + 1, dtype=float)[:, None]
    k = np.arange(1, n + 1, dtype=float)[None, :]
    return np.where(k < j, -config.gamma * config.xi, _lead(config, j) / k - config.gamma)


def direct_moments(config: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    """Mean and variance of every ``V_j`` as plain row sums of ``b`` and ``b**2``."""
    b = coefficient_matrix(config)
    return b.sum(axis=1), (b * b).sum(axis=1)


def harmonic_numbers(n: int) -> np.ndarray:
    """``H_0 .. H_n`` by compensated summation."""
    h = np.zeros(n + 1)
    h[1:] = compensated_cumsum(1.0 / np.arange(1, n + 1))
    return h


def _suffix_sums(values: np.ndarray) -> np.ndarray:
    return compensated_cumsum(values[::-1])[::-1]


@dataclass(frozen=True)
class MomentProfile:
    n: int
    mu: np.ndarray
    sigma: np.ndarray
    A: np.ndarray
    B: np.ndarray
    a: np.ndarray
    harmonic: np.ndarray

    @property
    def variance(self) -> np.ndarray:
        return self.sigma**2

    @property
    def x(self) -> np.ndarray:
        return np.arange(1, self.n + 1) / self.n


def moment_profile(config: SystemConfig) -> MomentProfile:
    """Closed-form mean and standard deviation of ``V_1 .. V_n``.

    Notes
    -----
    With ``a_j = 1 + gamma (xi + (1 - xi) j)``,

        mu_j      = a_j (H_n - H_{j-1}) - gamma (n - (1 - xi)(j - 1))
        sigma_j^2 = a_j^2 S2_j - 2 a_j gamma S1_j + gamma^2 (n - j + 1 + (j - 1) xi^2)

    where ``S1_j``, ``S2_j`` are the tail sums of ``1/k`` and ``1/k^2`` over
    ``k >= j``. Tail sums are accumulated from the small end with
    compensation so nothing is lost to cancellation for large ``n``.
    """
    n, g, xi = config.n, config.gamma, config.xi
    j = np.arange(1, n + 1, dtype=float)
    k = np.arange(1, n + 1, dtype=float)
    s1 = _suffix_sums(1.0 / k)
    s2 = _suffix_sums(1.0 / (k * k))
    a = _lead(config, j)
    B = g * (n - (1.0 - xi) * (j - 1.0))
    mu = a * s1 - B
    var = a * a * s2 - 2.0 * a * g * s1 + g * g * (n - j + 1.0 + (j - 1.0) * xi * xi)
    sigma = np.sqrt(np.maximum(var, 0.0))
    return MomentProfile(n, mu, sigma, a.copy(), B, a, harmonic_numbers(n))


def mean_deviation(config: SystemConfig, profile: Optional[MomentProfile] = None) -> float:
    """``(1/n) sum_j |mu_j - f(j/n)|`` against the limiting curve."""
    from .asymptotics import curve

    prof = profile or moment_profile(config)
    f = curve(config.alpha, config.xi).f(prof.x)
    return float(np.mean(np.abs(prof.mu - f)))


def mean_deviation_bound(config: SystemConfig) -> float:
    """``(H_n + (log n + 1) / alpha) / n``."""
    n = config.n
    h_n = harmonic_numbers(n)[-1]
    return float((h_n + (math.log(n) + 1.0) / config.alpha) / n)


def pv_curve(config: SystemConfig, params: Optional[InversionParams] = None,
             ranks: Optional[Sequence[int]] = None, workers: Optional[int] = None) -> np.ndarray:
    """``p_V(j) = P(V_j >= c)`` by numerical Laplace inversion.

    Parameters
    ----------
    config : SystemConfig
        Must have ``xi == 0``.
    params : InversionParams, optional
    ranks : sequence of int, optional
        Subset of ranks to evaluate (default ``1..n``).
    workers : int, optional
        Thread count; each rank is independent so the result does not depend
        on it. Capped by ``SICASY_THREADS``.

    Raises
    ------
    NotImplementedError
        For ``xi > 0``.
    InversionError
        When an inversion cannot reach the requested accuracy.
    """
    if config.xi != 0.0:
        raise NotImplementedError("exact inversion unsupported for ξ>0; use montecarlo")
    params = params or InversionParams()
    if ranks is None:
        ranks = range(1, config.n + 1)
    ranks = [_check_rank(config, j) for j in ranks]
    c = config.c

    def one(j):
        return coefficients(config, j).law.ccdf(c, params)

    cap = thread_count()
    nw = min(cap, workers or cap, len(ranks))
    if nw <= 1 or config.n < 64:
        return np.array([one(j) for j in ranks])
    with ThreadPoolExecutor(max_workers=nw) as pool:
        return np.array(list(pool.map(one, ranks)))


@dataclass(frozen=True)
class TransitionProfile:
    x: np.ndarray
    p: np.ndarray
    location: Optional[float]
    zeta: float


def transition_profile(config: SystemConfig, params: Optional[InversionParams] = None,
                       workers: Optional[int] = None) -> TransitionProfile:
    """Normalised ``(j/n, p_V(j))`` with the first rank where ``p_V`` drops below 1/2.

    ``location`` is ``None`` if the curve never drops below 1/2. The limiting
    decodable fraction is attached for comparison.
    """
    from .asymptotics import zeta_of_alpha

    p = pv_curve(config, params, workers=workers)
    x = np.arange(1, config.n + 1) / config.n
    below = np.flatnonzero(p < 0.5)
    loc = float(x[below[0]]) if below.size else None
    return TransitionProfile(x, p, loc, zeta_of_alpha(config.alpha, config.xi, config.c))
