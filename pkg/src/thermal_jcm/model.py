"""Physical parameters of the Jaynes-Cummings model and the spectral functions.

Units: hbar = 1 and k_B = 1, so the inverse temperature ``beta`` carries
inverse-frequency units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import DomainError

# below this |x| the removable singularity of sin^2(sqrt(x) k t)/x is
# evaluated from its Taylor series
SMALL_X = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """omega0: atom transition frequency, omega: cavity frequency,
    kappa: real coupling, alpha: real coherent amplitude."""

    omega0: float
    omega: float
    kappa: float
    alpha: float

    def __post_init__(self):
        if not (self.omega0 > 0 and self.omega > 0):
            raise DomainError(f"frequencies must be positive, got omega0={self.omega0}, omega={self.omega}")
        for name in ("omega0", "omega", "kappa", "alpha"):
            v = getattr(self, name)
            if isinstance(v, complex) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real number, got {v!r}")

    @classmethod
    def from_detuning(cls, c: float, kappa: float, alpha: float, omega0: float = 2.0) -> "ModelParams":
        """Parameters with omega > omega0 chosen so that (delta_omega / 2 kappa)^2 == c."""
        if c < 0:
            raise DomainError("c must be non-negative")
        return cls(omega0=omega0, omega=omega0 + 2.0 * abs(kappa) * math.sqrt(c), kappa=kappa, alpha=alpha)


@dataclass(frozen=True)
class DerivedParams:
    delta_omega: float
    c: float


@dataclass(frozen=True)
class ThermalPoint:
    """Inverse temperature with the boson (theta) and fermion (Theta) TFD angles."""

    beta: float
    theta: float
    Theta: float

    @classmethod
    def zero(cls) -> "ThermalPoint":
        return cls(beta=math.inf, theta=0.0, Theta=0.0)

    @property
    def cos2_Theta(self) -> float:
        return math.cos(self.Theta) ** 2

    @property
    def sin2_Theta(self) -> float:
        return math.sin(self.Theta) ** 2


def derive(params: ModelParams) -> DerivedParams:
    if params.kappa == 0:
        raise DomainError("degenerate coupling: kappa = 0 leaves c undefined")
    dw = params.omega - params.omega0
    return DerivedParams(delta_omega=dw, c=(dw / (2.0 * params.kappa)) ** 2)


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("g-functions are only defined for x >= 0")
    return x


def sin2_over_x(x, kappa: float, t):
    """sin^2(sqrt(x)|kappa|t)/x, continued analytically to x = 0."""
    x = _check_x(x)
    kt = np.abs(kappa) * np.asarray(t, dtype=float)
    x, kt = np.broadcast_arrays(x, kt)
    out = np.empty(x.shape)
    small = x < SMALL_X
    big = ~small
    xb = x[big]
    out[big] = np.sin(np.sqrt(xb) * kt[big]) ** 2 / xb
    ks = kt[small] ** 2
    y2 = x[small] * ks
    out[small] = ks * (1.0 - y2 / 3.0 + 2.0 * y2 * y2 / 45.0)
    return out[()] if out.ndim == 0 else out


def g1(x, c: float, kappa: float, t):
    """cos^2(sqrt(x)|kappa|t) + c sin^2(sqrt(x)|kappa|t)/x.

    At x = 0 this is 1 + c (kappa t)^2.  Broadcasts over ``x`` and ``t``.
    """
    x = _check_x(x)
    s = sin2_over_x(x, kappa, t)
    cos2 = np.cos(np.sqrt(x) * np.abs(kappa) * np.asarray(t, dtype=float)) ** 2
    return cos2 + c * s


def g2(x, c: float, kappa: float, t):
    """sin^2(sqrt(x)|kappa|t) (x - c) / x; equals -c (kappa t)^2 at x = 0."""
    x = _check_x(x)
    return sin2_over_x(x, kappa, t) * (x - c)


def thermal_point(beta: float, params: ModelParams) -> ThermalPoint:
    """theta = arctanh(exp(-beta omega / 2)), Theta = arctan(exp(-beta omega0 / 2))."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if math.isinf(beta):
        return ThermalPoint.zero()
    return ThermalPoint(
        beta=beta,
        theta=math.atanh(math.exp(-beta * params.omega / 2.0)),
        Theta=math.atan(math.exp(-beta * params.omega0 / 2.0)),
    )


def theta_to_beta(theta: float, omega: float) -> float:
    """Inverse of the boson map: beta such that theta(beta) == theta."""
    if not theta > 0:
        if theta == 0:
            return math.inf
        raise DomainError(f"theta must be positive, got {theta}")
    return -2.0 * math.log(math.tanh(theta)) / omega


def thermal_from_theta(theta: float, params: ModelParams) -> ThermalPoint:
    """ThermalPoint for a given boson angle, using the model's frequency pair."""
    if theta == 0:
        return ThermalPoint.zero()
    beta = theta_to_beta(theta, params.omega)
    tp = thermal_point(beta, params)
    # keep theta exactly as requested; beta round trip is accurate to ~1e-15
    return ThermalPoint(beta=beta, theta=theta, Theta=tp.Theta)


def poisson_weights(alpha: float, N: int) -> np.ndarray:
    """Photon-number weights e^{-a^2} a^{2n}/n! for n = 0..N, computed in log space."""
    if N < 0:
        raise DomainError(f"truncation N must be >= 0, got {N}")
    n = np.arange(N + 1, dtype=float)
    a2 = float(alpha) ** 2
    if a2 == 0.0:
        w = np.zeros(N + 1)
        w[0] = 1.0
        return w
    return np.exp(-a2 + n * math.log(a2) - gammaln(n + 1.0))


def truncation_residue(alpha: float, N: int) -> float:
    """Poisson mass dropped by cutting the photon-number sum at n = N."""
    return float(poisson.sf(N, float(alpha) ** 2))
