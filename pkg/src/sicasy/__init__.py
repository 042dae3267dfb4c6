"""Exact, asymptotic and simulated performance of successive interference
cancellation under n concurrent transmissions."""

from .asymptotics import (
    AsymptoticCurve,
    AsymptoticResult,
    CaptureResult,
    capture_baseline,
    capture_optimum,
    curve,
    optimize_alpha,
    sum_rate,
    zeta,
    zeta_of_alpha,
)
from .fading import (
    CalibratedThreshold,
    FadingModel,
    GammaFading,
    Rayleigh,
    TwoLevelRayleigh,
    calibrate,
    make_gamma,
    make_rayleigh,
    parse_model,
)
from .general_fading import (
    GeneralAsymptotics,
    gamma_sum_rate_sweep,
    mean_inequality_margin,
    order_stat_means,
    solve_y_star,
)
from .montecarlo import SimulationPlan, SimulationReport, convergence_study, run, sample_vj_marginals
from .numerics import InversionParams, QuadratureParams, RootBracket, find_root, integrate, invert_ccdf
from .sic_exact import (
    MomentProfile,
    SicCoefficients,
    SystemConfig,
    coefficients,
    mean_deviation,
    mean_deviation_bound,
    moment_profile,
    pv_curve,
    transition_profile,
)

__version__ = "0.1.0"
