"""Zero-temperature dynamics, time scales, the dressed spectrum and the
short-time law with counter-rotating terms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import DomainError, GuardError
from .model import DerivedParams, ModelParams, g1, poisson_weights

DEFAULT_N = 100
DEFAULT_N_MAX = 200
# sentinel returned by ground_state_index for the bare ground state |0, g>
BARE_GROUND = -1


def pg_zero(params: ModelParams, derived: DerivedParams, t, N: int = DEFAULT_N):
    """Ground-state probability of the atom for a coherent field, zero temperature."""
    if N < 1:
        raise DomainError(f"truncation N must be >= 1, got {N}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be non-negative")
    w = poisson_weights(params.alpha, N)
    x = np.arange(N + 1, dtype=float) + derived.c
    vals = g1(x, derived.c, params.kappa, t[..., None])
    out = vals @ w
    return out[()] if out.ndim == 0 else out


def sigma_z_zero(params: ModelParams, derived: DerivedParams, t, N: int = DEFAULT_N):
    """Inversion 1 - 2 P_g(t)."""
    return 1.0 - 2.0 * pg_zero(params, derived, t, N)


def envelope_approx(alpha: float, kappa: float, t):
    """Large-amplitude approximation of the zero-temperature inversion."""
    t = np.asarray(t, dtype=float)
    a = abs(alpha)
    k = abs(kappa)
    a2 = a * a
    env = np.exp(a2 * (np.cos(k * t / a) - 1.0))
    return -env * np.cos(a * k * t + a2 * np.sin(k * t / a))


@dataclass(frozen=True)
class TimescaleEstimate:
    collapse: float
    revival: float
    rabi: float
    theta: float = 0.0

    def revival_thermal(self, theta: Optional[float] = None) -> float:
        """Revival time with the amplitude scaled to |alpha| e^theta."""
        th = self.theta if theta is None else theta
        return self.revival * math.exp(th)


def timescales(params: ModelParams, theta: float = 0.0) -> TimescaleEstimate:
    a, k = abs(params.alpha), abs(params.kappa)
    if a == 0 or k == 0:
        raise DomainError("time scales need alpha != 0 and kappa != 0")
    return TimescaleEstimate(collapse=1.0 / k, revival=2.0 * math.pi * a / k, rabi=math.pi / (a * k), theta=theta)


@dataclass(frozen=True)
class SpectrumRow:
    n: int
    lambda_n: float
    E_n1: float
    E_n2: float
    theta_n: float


def _with_kappa(params: ModelParams, kappa: Optional[float]) -> Tuple[float, float, float]:
    k = params.kappa if kappa is None else float(kappa)
    return params.omega0, params.omega, k


def spectrum(params: ModelParams, n_max: int, kappa: Optional[float] = None) -> Tuple[List[SpectrumRow], float]:
    """Dressed doublets for n = 0..n_max and the bare ground energy -omega0/2."""
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    w0, w, k = _with_kappa(params, kappa)
    half_dw = 0.5 * (w - w0)
    n = np.arange(n_max + 1, dtype=float)
    lam = np.sqrt(half_dw**2 + k * k * (n + 1.0))
    mid = w * (n + 0.5)
    # arctan2 keeps the angle defined when both the numerator and denominator vanish
    th = np.arctan2(k * np.sqrt(n + 1.0), half_dw + lam)
    rows = [
        SpectrumRow(n=int(i), lambda_n=float(lam[i]), E_n1=float(mid[i] + lam[i]), E_n2=float(mid[i] - lam[i]), theta_n=float(th[i]))
        for i in range(n_max + 1)
    ]
    return rows, -0.5 * w0


def _lower_branch(w0, w, k, n_max):
    n = np.arange(n_max + 1, dtype=float)
    lam = np.sqrt((0.5 * (w - w0)) ** 2 + k * k * (n + 1.0))
    return w * (n + 0.5) - lam, w * (n + 0.5) + lam


def ground_state_index(params: ModelParams, kappa_value: Optional[float] = None, n_max: int = DEFAULT_N_MAX) -> int:
    """Index n of the lowest E_{n,2}, or BARE_GROUND when E_{0,0} is lowest."""
    w0, w, k = _with_kappa(params, kappa_value)
    lower, _ = _lower_branch(w0, w, k, n_max)
    i = int(np.argmin(lower))
    if i == n_max:
        raise GuardError(f"lowest dressed level sits at the boundary n_max={n_max}; increase n_max")
    # ties go to the bare ground state
    if -0.5 * w0 <= lower[i]:
        return BARE_GROUND
    return i


def excitation_gap(params: ModelParams, kappa_value: Optional[float] = None, n_max: int = DEFAULT_N_MAX) -> float:
    """Second-lowest minus lowest level of the full JCM spectrum."""
    w0, w, k = _with_kappa(params, kappa_value)
    lower, upper = _lower_branch(w0, w, k, n_max)
    levels = np.concatenate(([-0.5 * w0], lower, upper))
    order = np.argsort(levels, kind="stable")
    # index 1 + n_max is E_{n_max,2}; it must not be among the two lowest
    if (1 + n_max) in order[:2]:
        raise GuardError(f"low-lying level at the boundary n_max={n_max}; increase n_max")
    return float(levels[order[1]] - levels[order[0]])


def short_time_inversion(nbar: float, phi: float, kappa: float, t, theta: float = 0.0):
    """Quadratic short-time inversion with counter-rotating terms, atom initially excited.

    For theta > 0 the mean photon number is scaled by e^{2 theta}; that branch
    is an unverified extrapolation and is not checked against the oracle.
    """
    t = np.asarray(t, dtype=float)
    n_eff = nbar * math.exp(2.0 * theta) if theta > 0 else nbar
    return 1.0 - 2.0 * (kappa * t) ** 2 * (4.0 * n_eff * math.cos(phi) ** 2 + 1.0)
