"""Exact per-rank decoding probability and its sharpening transition.

For Rayleigh fading and gamma = 1/(alpha n), prints P(V_j >= c) at a few
normalised ranks for growing n, next to the limiting decodable fraction.
"""

import numpy as np

from sicasy import SystemConfig, pv_curve, zeta_of_alpha

ALPHA = 0.38

for n in (50, 200, 1000):
    cfg = SystemConfig.scaled(n, ALPHA)
    ranks = sorted({max(1, int(round(f * n))) for f in (0.5, 0.8, 0.85, 0.9, 0.95, 1.0)})
    p = pv_curve(cfg, ranks=ranks)
    cells = "  ".join(f"{j / n:.2f}:{v:.3f}" for j, v in zip(ranks, p))
    print(f"n={n:5d}  {cells}")

print(f"limiting fraction zeta = {zeta_of_alpha(ALPHA, 0.0, SystemConfig.scaled(1, ALPHA).c):.4f}")
