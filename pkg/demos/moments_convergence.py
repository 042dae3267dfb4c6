"""Mean and spread of V_j against the limit curve, with the deviation bound."""

from sicasy import SystemConfig, curve, mean_deviation, mean_deviation_bound, moment_profile

for alpha in (0.32, 0.38):
    for n in (50, 1000):
        cfg = SystemConfig.scaled(n, alpha)
        prof = moment_profile(cfg)
        mid = n // 2
        f_mid = float(curve(alpha).f(prof.x[mid]))
        print(f"alpha={alpha} n={n:5d}  mu(x=0.5)={prof.mu[mid]:.4f}  f(0.5)={f_mid:.4f}  "
              f"sigma(0.5)={prof.sigma[mid]:.4f}  "
              f"mean |mu - f| = {mean_deviation(cfg):.4f} <= {mean_deviation_bound(cfg):.4f}")
