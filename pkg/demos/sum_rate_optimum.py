"""Best load factor and asymptotic sum-rate as cancellation gets imperfect."""

from sicasy import calibrate, capture_optimum, make_rayleigh, optimize_alpha

c = calibrate(make_rayleigh(), 0.1).c
for xi in (0.0, 0.05, 0.1, 0.2, 0.4):
    opt = optimize_alpha(xi, c)
    print(f"xi={xi:4.2f}  alpha*={opt.alpha_star:.4f}  U*={opt.u_star:.4f} bit/s/Hz  zeta*={opt.zeta_star:.4f}")
a, u = capture_optimum(0.1)
print(f"capture-only receiver: alpha*={a}  U*={u:.4f} bit/s/Hz")
