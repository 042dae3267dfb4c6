"""Independent reference computations used only by the tests."""

from __future__ import annotations

import math

import numpy as np

C_RAYLEIGH_10 = -math.log(0.9)


def partial_fraction_ccdf(b, t):
    """``P(sum b_k X_k > t)`` for distinct ``b_k``; only positive terms contribute for t >= 0."""
    b = np.asarray([v for v in b if v != 0.0], dtype=float)
    total = 0.0
    for k, bk in enumerate(b):
        if bk <= 0:
            continue
        others = np.delete(b, k)
        total += np.prod(bk / (bk - others)) * math.exp(-t / bk)
    return total


def coefficient_row_by_counting(n, gamma, xi, j):
    """Expand ``Y_(j) - gamma sum_{r>j} Y_(r) - gamma xi sum_{r<j} Y_(r)`` in spacings.

    ``Y_(r) = sum_{k>=r} X_k / k``, so ``X_k`` collects ``1/k`` from every
    ``r <= k`` with the weight attached to that ``r``.
    """
    row = np.zeros(n)
    for k in range(1, n + 1):
        w = 0.0
        for r in range(1, k + 1):
            if r == j:
                w += 1.0
            elif r > j:
                w -= gamma
            else:
                w -= gamma * xi
        row[k - 1] = w / k
    return row


def f_curve(x, alpha, xi):
    x = np.asarray(x, dtype=float)
    return -(1 + (1 - xi) * x / alpha) * np.log(x) - (1 - (1 - xi) * x) / alpha


def zeta_scan(alpha, xi, c, step=1e-5):
    """First grid point where the limit curve drops below ``c``."""
    x = np.arange(step, 1.0 + step / 2, step)
    below = np.flatnonzero(f_curve(x, alpha, xi) < c)
    return float(x[below[0]]) if below.size else 1.0


def stationary_scan(alpha, step=1e-6):
    """Sign changes of ``alpha + x log x`` on a grid."""
    x = np.arange(step, 1.0, step)
    h = alpha + x * np.log(x)
    idx = np.flatnonzero(np.sign(h[:-1]) != np.sign(h[1:]))
    return [float(x[i]) for i in idx]


def harmonic(n):
    return math.fsum(1.0 / k for k in range(1, n + 1))


def binomial_se(p, n):
    return math.sqrt(max(p * (1 - p), 0.0) / n)
