"""Low-temperature expansion of the atomic ground-state probability.

P_g is expanded in powers of the boson angle theta through third order while
the fermion angle Theta enters exactly:

    P_g = cos^2(Theta) sum_n theta^n/n! P1[n] + sin^2(Theta) sum_n theta^n/n! P2[n]

Each correction P_kind[n] is an integer polynomial in alpha^2 times the
Poisson-weighted series Q_kind^(l), l = 0..n.  Both kinds share the same
coefficient table.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from . import kernels
from .errors import DomainError
from .model import DerivedParams, ModelParams, ThermalPoint, poisson_weights, truncation_residue

DEFAULT_N = 100
MAX_ORDER = 3

# COEFFICIENTS[order][l] lists the coefficients of Q^(l) by increasing power of alpha^2
COEFFICIENTS = {
    0: ((1,),),
    1: ((0, -2), (0, 2)),
    2: ((-2, -2, 4), (2, 0, -8), (0, 2, 4)),
    3: ((0, 16, 12, -8), (0, -40, -12, 24), (0, 24, -12, -24), (0, 0, 12, 8)),
}


class ExpansionRangeWarning(UserWarning):
    """theta lies outside the range where the third-order series was validated."""


@dataclass(frozen=True)
class QSeriesSpec:
    kind: int
    l: int
    N: int = DEFAULT_N

    def __post_init__(self):
        if self.kind not in (1, 2):
            raise DomainError(f"kind must be 1 or 2, got {self.kind}")
        if not 0 <= self.l <= MAX_ORDER:
            raise DomainError(f"shift l must be in 0..{MAX_ORDER}, got {self.l}")
        if self.N < 1:
            raise DomainError(f"truncation N must be >= 1, got {self.N}")


def coefficient(order: int, l: int, alpha: float) -> float:
    a2 = float(alpha) ** 2
    return float(sum(cf * a2**p for p, cf in enumerate(COEFFICIENTS[order][l])))


def combine(order: int, q_values: Sequence, alpha: float):
    """Apply the order-``order`` coefficients to Q^(0..order)."""
    if order not in COEFFICIENTS:
        raise NotImplementedError(f"corrections are available for orders 0..{MAX_ORDER}, got {order}")
    q0 = np.asarray(q_values[0], dtype=float)
    if order == 0:
        return q0
    # rows sum to zero for order >= 1, so combining differences Q^(l) - Q^(0)
    # drops the large common part before the big coefficients multiply it
    return sum(coefficient(order, l, alpha) * (np.asarray(q_values[l], dtype=float) - q0) for l in range(1, order + 1))


def _as_grid(t):
    t = np.asarray(t, dtype=float)
    return t.reshape(-1), t.shape


def q_block(params: ModelParams, derived: DerivedParams, t, N: int = DEFAULT_N, l_max: int = MAX_ORDER):
    """All Q-series on the grid: array [kind-1, l, i]."""
    tt, _ = _as_grid(t)
    w = poisson_weights(params.alpha, N)
    return kernels.q_block(tt, w, derived.c, params.kappa, l_max)


def q_series(spec: QSeriesSpec, params: ModelParams, derived: DerivedParams, t):
    tt, shape = _as_grid(t)
    q = q_block(params, derived, tt, spec.N, spec.l)
    return q[spec.kind - 1, spec.l].reshape(shape)[()]


def correction(order: int, kind: int, params: ModelParams, derived: DerivedParams, t, N: int = DEFAULT_N):
    """Raw correction P^(order) of the given kind (no theta weight)."""
    if order not in COEFFICIENTS:
        raise NotImplementedError(f"corrections are available for orders 0..{MAX_ORDER}, got {order}")
    if kind not in (1, 2):
        raise DomainError(f"kind must be 1 or 2, got {kind}")
    tt, shape = _as_grid(t)
    q = q_block(params, derived, tt, N, order)
    return combine(order, q[kind - 1], params.alpha).reshape(shape)[()]


@dataclass(frozen=True)
class CorrectionBreakdown:
    """raw[n, k] is P^(n) of kind k+1; weighted[n, k] carries theta^n/n! and cos^2/sin^2 Theta."""

    theta: float
    Theta: float
    raw: np.ndarray
    weighted: np.ndarray
    p_g: np.ndarray
    sigma_z: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return 1.0 - 2.0 * self.weighted.sum(axis=(0, 1))

    def table_weighted(self) -> np.ndarray:
        """theta^n/n! P^(n) without the Theta factors, as listed in the correction tables."""
        f = np.array([self.theta**n / math.factorial(n) for n in range(MAX_ORDER + 1)])
        return self.raw * f[:, None, None]


def _check_range(alpha: float, theta: float) -> None:
    if theta > math.pi / 32 or (abs(alpha) > 4 and theta > math.pi / 60):
        warnings.warn(
            f"theta={theta:.4g} at alpha={alpha:g} is beyond the validated range of the third-order series",
            ExpansionRangeWarning,
            stacklevel=3,
        )


def breakdown(params: ModelParams, derived: DerivedParams, thermal: ThermalPoint, t, N: int = DEFAULT_N) -> CorrectionBreakdown:
    _check_range(params.alpha, thermal.theta)
    tt, _ = _as_grid(t)
    q = q_block(params, derived, tt, N, MAX_ORDER)
    raw = np.empty((MAX_ORDER + 1, 2, tt.shape[0]))
    for order in range(MAX_ORDER + 1):
        for k in range(2):
            raw[order, k] = combine(order, q[k], params.alpha)
    f = np.array([thermal.theta**n / math.factorial(n) for n in range(MAX_ORDER + 1)])
    weighted = raw * f[:, None, None] * np.array([thermal.cos2_Theta, thermal.sin2_Theta])[None, :, None]
    p_g = weighted.sum(axis=(0, 1))
    return CorrectionBreakdown(
        theta=thermal.theta, Theta=thermal.Theta, raw=raw, weighted=weighted, p_g=p_g, sigma_z=1.0 - 2.0 * p_g
    )


def sigma_z_thermal(params: ModelParams, derived: DerivedParams, thermal: ThermalPoint, t, N: int = DEFAULT_N):
    """Third-order thermal inversion and its per-order breakdown."""
    tt, shape = _as_grid(t)
    bd = breakdown(params, derived, thermal, tt, N)
    return bd.sigma_z.reshape(shape)[()], bd


def correction_range(order: int, kind: int, params: ModelParams, derived: DerivedParams, theta: float, grid, N: int = DEFAULT_N) -> Tuple[float, float]:
    """(min, max) of theta^n/n! P^(n) over the grid."""
    v = correction(order, kind, params, derived, np.asarray(grid, dtype=float).reshape(-1), N)
    v = np.atleast_1d(v) * (theta**order / math.factorial(order))
    return float(v.min()), float(v.max())


def truncation_gap(params: ModelParams, derived: DerivedParams, t, N: int = DEFAULT_N, N_ref: int = 150) -> float:
    """Largest change of any raw correction when the photon sum grows from N to N_ref."""
    tt, _ = _as_grid(t)
    a = q_block(params, derived, tt, N)
    b = q_block(params, derived, tt, N_ref)
    diffs = [np.max(np.abs(combine(o, b[k], params.alpha) - combine(o, a[k], params.alpha))) for o in range(MAX_ORDER + 1) for k in range(2)]
    return float(max(diffs))


__all__ = [
    "COEFFICIENTS",
    "CorrectionBreakdown",
    "ExpansionRangeWarning",
    "QSeriesSpec",
    "breakdown",
    "coefficient",
    "combine",
    "correction",
    "correction_range",
    "q_series",
    "sigma_z_thermal",
    "truncation_gap",
    "truncation_residue",
]
