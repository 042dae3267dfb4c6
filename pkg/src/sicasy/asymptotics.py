"""Large-n theory for Rayleigh fading with the target SNIR scaled as
``gamma = 1 / (alpha n)``.

The mean of ``V_j`` settles on the curve

    f(x) = -(1 + (1 - xi) x / alpha) log x - (1 - (1 - xi) x) / alpha

and the decodable fraction is the first point where ``f`` drops below ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numerics import RootBracket, find_root

__all__ = [
    "AsymptoticCurve",
    "AsymptoticResult",
    "CaptureResult",
    "OptimalAlpha",
    "g_beta",
    "curve",
    "zeta",
    "zeta_of_alpha",
    "jump_alpha",
    "continuity_threshold",
    "optimize_alpha",
    "capture_baseline",
    "capture_optimum",
    "sum_rate",
]

LN2 = math.log(2.0)
_TINY = np.finfo(float).tiny
_XTOL = 1e-13


def g_beta(x, beta: float):
    """``g_beta(x) = -(1 + x/beta) log x + x/beta``."""
    x = np.asarray(x, dtype=float)
    return -(1.0 + x / beta) * np.log(x) + x / beta


@dataclass(frozen=True)
class AsymptoticCurve:
    alpha: float
    xi: float = 0.0
    stationary_points: Optional[tuple[float, float]] = field(init=False, default=None)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0.0 <= self.xi < 1.0:
            raise ValueError("xi must lie in [0, 1)")
        object.__setattr__(self, "stationary_points", _stationary_points(self.beta))

    @property
    def beta(self) -> float:
        return self.alpha / (1.0 - self.xi)

    def f(self, x):
        x = np.asarray(x, dtype=float)
        k = (1.0 - self.xi) / self.alpha
        return -(1.0 + k * x) * np.log(x) - (1.0 - k * x * self.alpha) / self.alpha

    __call__ = f

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return -1.0 / x - np.log(x) / self.beta

    @property
    def has_stationary_points(self) -> bool:
        return self.stationary_points is not None


def _stationary_points(beta: float):
    """Roots of ``beta + x log x = 0`` on (0, 1), if ``beta < 1/e``."""
    if not beta < 1.0 / math.e:
        return None

    def h(x):
        return beta + x * math.log(x)

    inv_e = 1.0 / math.e
    if h(inv_e) == 0.0:
        return None
    x1 = find_root(h, RootBracket.of(h, _TINY, inv_e), _XTOL * 1e-3)
    x2 = find_root(h, RootBracket.of(h, inv_e, 1.0), _XTOL)
    return (x1, x2)


def curve(alpha: float, xi: float = 0.0) -> AsymptoticCurve:
    return AsymptoticCurve(float(alpha), float(xi))


@dataclass(frozen=True)
class AsymptoticResult:
    alpha: float
    xi: float
    c: float
    zeta: float
    regime: str  # "monotone" | "bimodal-above-c" | "bimodal-blocking"

    @property
    def u_infinity(self) -> float:
        return self.zeta / (self.alpha * LN2)


def _first_crossing(fc, lo: float, hi: float) -> float:
    # solve in log x so tiny roots keep full relative precision
    g = lambda u: fc(math.exp(u))
    return math.exp(find_root(g, RootBracket.of(g, math.log(lo), math.log(hi)), _XTOL))


def zeta(crv: AsymptoticCurve, c: float) -> AsymptoticResult:
    """``sup{x in (0, 1] : f(z) >= c for all z in (0, x)}``.

    With stationary points ``x1 < x2``: if the local minimum ``f(x1)`` stays
    at or above ``c`` the answer is the crossing on the decreasing tail after
    ``x2``; otherwise it is the first crossing before ``x1``.
    """
    if not c > 0:
        raise ValueError("threshold c must be positive")

    def fc(x):
        return float(crv.f(x)) - c

    sp = crv.stationary_points
    if sp is None:
        z = _first_crossing(fc, _TINY, 1.0)
        regime = "monotone"
    else:
        x1, x2 = sp
        if fc(x1) >= 0.0:
            z = _first_crossing(fc, x2, 1.0)
            regime = "bimodal-above-c"
        else:
            z = _first_crossing(fc, _TINY, x1)
            regime = "bimodal-blocking"
    return AsymptoticResult(crv.alpha, crv.xi, c, z, regime)


def zeta_of_alpha(alpha: float, xi: float, c: float) -> float:
    return zeta(curve(alpha, xi), c).zeta


def continuity_threshold(c: float) -> float:
    """Smallest ``xi`` for which ``zeta`` is continuous in ``alpha``: ``1 - e/(3 - c)``."""
    return 1.0 - math.e / (3.0 - c)


def _min_excess(alpha: float, xi: float, c: float) -> float:
    crv = curve(alpha, xi)
    x1 = crv.stationary_points[0]
    return float(crv.f(x1)) - c


def jump_alpha(xi: float, c: float) -> Optional[float]:
    """The ``alpha`` where ``f(x1) = c`` and ``zeta`` jumps, or ``None``."""
    a_max = (1.0 - xi) / math.e
    hi = a_max * (1.0 - 1e-12)
    if _min_excess(hi, xi, c) <= 0.0:
        return None
    lo = a_max * 1e-3
    while _min_excess(lo, xi, c) >= 0.0:
        lo *= 0.5
        if lo < 1e-12:
            return None
    fn = lambda a: _min_excess(a, xi, c)
    return find_root(fn, RootBracket.of(fn, lo, hi), 1e-13)


@dataclass(frozen=True)
class OptimalAlpha:
    xi: float
    c: float
    alpha_star: float
    u_star: float
    zeta_star: float
    jump: Optional[float]


def _golden_max(fn, lo: float, hi: float, tol: float):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fn(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def optimize_alpha(xi: float, c: float, lo: float = 0.02, hi: float = 3.0,
                   tol: float = 1e-7, grid: int = 400) -> OptimalAlpha:
    """Maximise ``U_inf(alpha) = zeta(alpha) / (alpha log 2)`` over ``[lo, hi]``.

    The interval is cut at the jump of ``zeta`` (when there is one); each
    continuous piece is scanned on a grid and refined by golden section.
    """
    if not (0 < lo < hi):
        raise ValueError("alpha search interval must satisfy 0 < lo < hi")

    def u(a):
        return zeta_of_alpha(a, xi, c) / (a * LN2)

    jump = jump_alpha(xi, c)
    cuts = [lo, hi]
    if jump is not None and lo < jump < hi:
        cuts = [lo, jump, hi]

    best = (-math.inf, None)
    for a0, a1 in zip(cuts[:-1], cuts[1:]):
        # keep the open side of the jump off the grid
        left = a0
        right = a1 if a1 != jump else a1 * (1.0 - 1e-12)
        xs = np.linspace(left, right, grid)
        vals = np.array([u(a) for a in xs])
        k = int(np.argmax(vals))
        cand = [(vals[k], xs[k])]
        blo, bhi = xs[max(k - 1, 0)], xs[min(k + 1, grid - 1)]
        if bhi > blo:
            xa, fa = _golden_max(u, blo, bhi, tol)
            cand.append((fa, xa))
        for val, a in cand:
            if val > best[0]:
                best = (val, a)
    u_star, a_star = best
    return OptimalAlpha(xi, c, a_star, u_star, zeta_of_alpha(a_star, xi, c), jump)


@dataclass(frozen=True)
class CaptureResult:
    n: int
    gamma: float
    epsilon: float
    m_n: float
    u_n: float

    @property
    def alpha(self) -> float:
        return 1.0 / (self.gamma * self.n)

    @property
    def u_infinity(self) -> float:
        a = self.alpha
        return (1.0 - self.epsilon) * math.exp(-1.0 / a) / (a * LN2)


def capture_baseline(n: int, gamma: float, epsilon: float) -> CaptureResult:
    """Mean decoded count and sum-rate of a capture-only receiver."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    m = (1.0 - epsilon) * n * math.exp(-(n - 1) * math.log1p(gamma))
    return CaptureResult(n, gamma, epsilon, m, math.log1p(gamma) / LN2 * m)


def capture_optimum(epsilon: float) -> tuple[float, float]:
    """``(alpha*, U*_inf) = (1, (1 - eps) / (e log 2))``."""
    return 1.0, (1.0 - epsilon) / (math.e * LN2)


def sum_rate(n: int, gamma: float, mean_decoded: float) -> float:
    """``U_n = log2(1 + gamma) * m_n`` in bit/s/Hz."""
    if not 0.0 <= mean_decoded <= n:
        raise ValueError(f"mean_decoded must lie in [0, {n}], got {mean_decoded!r}")
    return math.log1p(gamma) / LN2 * mean_decoded
