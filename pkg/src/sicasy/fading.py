"""Channel power-gain models with unit mean, power-control calibration, and
descending order statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

from .numerics import inverse_regularized_incomplete_gamma

__all__ = [
    "FadingModel",
    "Rayleigh",
    "GammaFading",
    "TwoLevelRayleigh",
    "CalibratedThreshold",
    "PowerRandomization",
    "make_rayleigh",
    "make_gamma",
    "make_two_level",
    "parse_model",
    "calibrate",
    "as_generator",
    "sample_gains",
    "sample_gain_matrix",
    "sample_exponential_spacings",
    "spacings_to_order_statistics",
]


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


class FadingModel:
    """Unit-mean nonnegative channel gain ``Y``.

    Subclasses supply ``ccdf`` (G), ``inverse_ccdf`` (G^-1), ``pdf`` and
    ``partial_mean(y) = int_0^y u f(u) du``. Instances are immutable.
    """

    name: str = "fading"
    mean: float = 1.0

    @property
    def spec(self) -> str:
        return self.name

    @property
    def scov(self) -> float:
        raise NotImplementedError

    def ccdf(self, t):
        raise NotImplementedError

    def cdf(self, t):
        return 1.0 - self.ccdf(t)

    def inverse_ccdf(self, u):
        raise NotImplementedError

    def pdf(self, t):
        raise NotImplementedError

    def partial_mean(self, y):
        raise NotImplementedError

    def threshold(self, epsilon: float) -> float:
        """``c = G^-1(1 - epsilon)``."""
        return float(self.inverse_ccdf(1.0 - epsilon))

    def sample(self, rng: np.random.Generator, size):
        u = 1.0 - rng.random(size)  # (0, 1]
        return self.inverse_ccdf(u)

    def __repr__(self):
        return f"{type(self).__name__}({self.spec!r})"


@dataclass(frozen=True, repr=False)
class Rayleigh(FadingModel):
    name: str = "rayleigh"

    @property
    def scov(self) -> float:
        return 1.0

    def ccdf(self, t):
        return np.exp(-np.maximum(t, 0.0))

    def cdf(self, t):
        return -np.expm1(-np.maximum(t, 0.0))

    def inverse_ccdf(self, u):
        return -np.log(u)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0, np.exp(-np.abs(t)), 0.0)

    def partial_mean(self, y):
        y = np.asarray(y, dtype=float)
        return -np.expm1(-y) - y * np.exp(-y)

    def threshold(self, epsilon: float) -> float:
        return -math.log1p(-epsilon)


@dataclass(frozen=True, repr=False)
class GammaFading(FadingModel):
    """Gamma gain with shape ``eta`` and rate ``eta`` (mean 1, SCOV ``1/eta``)."""

    eta: float = 1.0

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"Gamma shape must be positive, got {self.eta!r}")

    @property
    def name(self) -> str:
        return f"gamma:{self.eta:g}"

    @property
    def scov(self) -> float:
        return 1.0 / self.eta

    def ccdf(self, t):
        return special.gammaincc(self.eta, self.eta * np.maximum(t, 0.0))

    def cdf(self, t):
        return special.gammainc(self.eta, self.eta * np.maximum(t, 0.0))

    def inverse_ccdf(self, u):
        return special.gammainccinv(self.eta, u) / self.eta

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        eta = self.eta
        with np.errstate(divide="ignore", invalid="ignore"):
            logf = eta * math.log(eta) + (eta - 1.0) * np.log(t) - eta * t - math.lgamma(eta)
            out = np.where(t > 0, np.exp(logf), 0.0)
        return out

    def partial_mean(self, y):
        return special.gammainc(self.eta + 1.0, self.eta * np.maximum(y, 0.0))

    def threshold(self, epsilon: float) -> float:
        return inverse_regularized_incomplete_gamma(self.eta, epsilon) / self.eta


@dataclass(frozen=True, repr=False)
class TwoLevelRayleigh(FadingModel):
    """``Y = X Z``: Rayleigh ``X`` times a two-level power factor ``Z``.

    ``Z = 1/b`` w.p. ``b/(1+b)`` and ``Z = b`` w.p. ``1/(1+b)``.
    """

    b: float = 1.0

    def __post_init__(self):
        if not (self.b >= 1.0 and math.isfinite(self.b)):
            raise ValueError(f"two-level spread b must be >= 1, got {self.b!r}")

    @property
    def name(self) -> str:
        return f"two-level:{self.b:g}"

    @property
    def randomization(self) -> "PowerRandomization":
        return PowerRandomization(self.b)

    @property
    def scov(self) -> float:
        return 2.0 * (self.b + 1.0 / self.b - 1.0) - 1.0

    def _mix(self):
        r = self.randomization
        return np.array(r.levels), np.array(r.probabilities)

    def ccdf(self, t):
        z, p = self._mix()
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        return np.sum(p * np.exp(-t[..., None] / z), axis=-1)

    def pdf(self, t):
        z, p = self._mix()
        t = np.asarray(t, dtype=float)
        dens = np.sum(p / z * np.exp(-np.abs(t)[..., None] / z), axis=-1)
        return np.where(t >= 0, dens, 0.0)

    def partial_mean(self, y):
        z, p = self._mix()
        y = np.maximum(np.asarray(y, dtype=float), 0.0)[..., None]
        r = y / z
        return np.sum(p * z * (-np.expm1(-r) - r * np.exp(-r)), axis=-1)

    def inverse_ccdf(self, u):
        """Vectorised safeguarded Newton on ``log G``."""
        z, p = self._mix()
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        logu = np.log(u)
        # p e^{-t/z_max} <= G(t) <= e^{-t/z_max} brackets the root
        zmax, pmax = z.max(), p[z.argmax()]
        lo = np.maximum(zmax * (math.log(pmax) - logu), 0.0)
        hi = np.maximum(-zmax * logu, 1e-300)
        x = 0.5 * (lo + hi)
        for _ in range(100):
            g = self.ccdf(x)
            dens = self.pdf(x)
            resid = np.log(g) - logu
            lo = np.where(resid > 0, x, lo)
            hi = np.where(resid > 0, hi, x)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = resid * g / dens
            x_new = x + step
            bad = ~np.isfinite(x_new) | (x_new <= lo) | (x_new >= hi)
            x_new = np.where(bad, 0.5 * (lo + hi), x_new)
            done = np.all(np.abs(x_new - x) <= 1e-15 * np.maximum(x_new, 1e-300))
            x = x_new
            if done:
                break
        x = np.where(u >= 1.0, 0.0, x)
        return x[0] if scalar else x


@dataclass(frozen=True)
class CalibratedThreshold:
    """Power-control calibration: ``c = G^-1(1 - epsilon)`` and ``S0 = gamma / c``."""

    epsilon: float
    c: float
    model: str = "rayleigh"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("calibrated threshold must be positive")

    @property
    def s0_over_gamma(self) -> float:
        return 1.0 / self.c


@dataclass(frozen=True)
class PowerRandomization:
    b: float = 1.0

    def __post_init__(self):
        if not self.b >= 1.0:
            raise ValueError("b must be >= 1")

    @property
    def levels(self) -> tuple[float, float]:
        return (1.0 / self.b, self.b)

    @property
    def probabilities(self) -> tuple[float, float]:
        return (self.b / (1.0 + self.b), 1.0 / (1.0 + self.b))

    def exact_mean(self) -> Fraction:
        """``E[Z]`` in rational arithmetic (for rational ``b``)."""
        b = Fraction(self.b).limit_denominator(10**12)
        return (1 / b) * (b / (1 + b)) + b * (1 / (1 + b))

    @property
    def scov_rayleigh(self) -> float:
        return 2.0 * (self.b + 1.0 / self.b - 1.0) - 1.0


def make_rayleigh() -> Rayleigh:
    return Rayleigh()


def make_gamma(eta: float) -> GammaFading:
    return GammaFading(float(eta))


def make_two_level(b: float) -> TwoLevelRayleigh:
    return TwoLevelRayleigh(float(b))


def parse_model(spec: str) -> FadingModel:
    """Parse ``"rayleigh"``, ``"gamma:<eta>"`` or ``"two-level:<b>"``."""
    text = spec.strip().lower()
    if text == "rayleigh":
        return make_rayleigh()
    kind, sep, arg = text.partition(":")
    if not sep:
        raise ValueError(f"unknown fading model {spec!r}")
    try:
        value = float(arg)
    except ValueError:
        raise ValueError(f"bad parameter in fading model {spec!r}") from None
    if kind == "gamma":
        return make_gamma(value)
    if kind == "two-level":
        return make_two_level(value)
    raise ValueError(f"unknown fading model {spec!r}")


def calibrate(model: FadingModel, epsilon: float) -> CalibratedThreshold:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    return CalibratedThreshold(epsilon=epsilon, c=model.threshold(epsilon), model=model.name)


def sample_gain_matrix(model: FadingModel, n: int, size: int, rng) -> np.ndarray:
    """``size`` independent rows of ``n`` gains, each sorted descending."""
    rng = as_generator(rng)
    y = model.sample(rng, (size, n))
    order = np.argsort(-y, axis=1, kind="stable")
    return np.take_along_axis(y, order, axis=1)


def sample_gains(model: FadingModel, n: int, seed) -> np.ndarray:
    """Draw ``n`` i.i.d. gains by inverse-CDF sampling, sorted descending.

    Ties keep their draw order (stable sort).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return sample_gain_matrix(model, n, 1, seed)[0]


def spacings_to_order_statistics(x: np.ndarray) -> np.ndarray:
    """Map unit exponentials ``X_1..X_n`` (last axis) to descending order
    statistics ``Y_(k) = sum_{j>=k} X_j / j``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    scaled = x / np.arange(1, n + 1)
    return np.flip(np.cumsum(np.flip(scaled, axis=-1), axis=-1), axis=-1)


def sample_exponential_spacings(n: int, seed) -> np.ndarray:
    """Descending order statistics of ``n`` unit exponentials, built from
    independent spacings rather than by sorting."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_generator(seed)
    x = -np.log(1.0 - rng.random(n))
    return spacings_to_order_statistics(x)
