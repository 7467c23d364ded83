"""Reproduction harness: inversion traces, revival-period sweeps with line fits,
correction-range tables and spectral scans."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, GuardError
from .expansion import DEFAULT_N, CorrectionBreakdown, breakdown
from .model import DerivedParams, ModelParams, ThermalPoint, derive, thermal_from_theta
from .parallel import thread_count
from .zero_temp import BARE_GROUND, DEFAULT_N_MAX, excitation_gap, ground_state_index, spectrum


def inclusive_grid(t0: float, t1: float, dt: float) -> np.ndarray:
    """t0 + k dt for k = 0..round((t1 - t0)/dt); both endpoints included."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    if t1 < t0:
        raise DomainError("grid end precedes its start")
    m = int(round((t1 - t0) / dt))
    return t0 + dt * np.arange(m + 1)


@dataclass(frozen=True)
class FigureConfig:
    alpha: float
    theta: float
    t_end: float
    omega0: float = 2.0
    omega: float = 4.0
    kappa: float = 1.0
    steps: int = 10000

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.omega0, self.omega, self.kappa, self.alpha)

    @property
    def grid(self) -> np.ndarray:
        return inclusive_grid(0.0, self.t_end, self.t_end / self.steps)


FIGURES: Dict[int, FigureConfig] = {
    1: FigureConfig(alpha=4.0, theta=0.0, t_end=20 * math.pi),
    2: FigureConfig(alpha=4.0, theta=math.pi / 32, t_end=20 * math.pi),
    3: FigureConfig(alpha=8.0, theta=0.0, t_end=40 * math.pi),
    4: FigureConfig(alpha=8.0, theta=math.pi / 60, t_end=40 * math.pi),
}


@dataclass(frozen=True)
class SweepConfig:
    alpha: float
    theta_max: float
    window: Tuple[float, float]
    dt: float
    n_points: int = 33
    omega0: float = 2.0
    omega: float = 4.0
    kappa: float = 1.0

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.omega0, self.omega, self.kappa, self.alpha)


SWEEPS: Dict[int, SweepConfig] = {
    5: SweepConfig(alpha=4.0, theta_max=math.pi / 32, window=(7.5 * math.pi, 10 * math.pi), dt=5e-4 * math.pi),
    6: SweepConfig(alpha=8.0, theta_max=math.pi / 60, window=(15 * math.pi, 20 * math.pi), dt=10e-4 * math.pi),
}

# correction tables reuse the time grids of the matching thermal figures
TABLES: Dict[int, int] = {1: 2, 2: 4}
TABLE_LABELS = {
    (1, 1): "theta*P1_g1", (1, 2): "theta*P1_g2",
    (2, 1): "theta^2/2*P2_g1", (2, 2): "theta^2/2*P2_g2",
    (3, 1): "theta^3/6*P3_g1", (3, 2): "theta^3/6*P3_g2",
}


@dataclass(frozen=True)
class InversionTrace:
    t: np.ndarray
    sigma_z: np.ndarray
    breakdown: CorrectionBreakdown


def inversion_trace(params: ModelParams, derived: DerivedParams, thermal: ThermalPoint, grid, N: int = DEFAULT_N) -> InversionTrace:
    t = np.atleast_1d(np.asarray(grid, dtype=float))
    bd = breakdown(params, derived, thermal, t, N)
    return InversionTrace(t=t, sigma_z=bd.sigma_z, breakdown=bd)


def figure_trace(figure: int, N: int = DEFAULT_N) -> InversionTrace:
    try:
        cfg = FIGURES[figure]
    except KeyError:
        raise DomainError(f"no trace figure {figure}; choose from {sorted(FIGURES)}") from None
    p = cfg.params
    return inversion_trace(p, derive(p), thermal_from_theta(cfg.theta, p), cfg.grid, N)


@dataclass(frozen=True)
class PeriodEstimate:
    theta: float
    t_max: float
    t_min: float
    sigma_at_max: float
    sigma_at_min: float

    @property
    def T(self) -> float:
        return 0.5 * (self.t_max + self.t_min)


def estimate_period(
    params: ModelParams,
    thermal: ThermalPoint,
    window: Tuple[float, float],
    dt: float,
    N: int = DEFAULT_N,
    sigma: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> PeriodEstimate:
    """Grid argmax/argmin of the inversion inside the window; T is their midpoint.

    ``sigma`` replaces the third-order inversion with any callable of t.
    The answer is quantized to the grid and to the Rabi half-period.
    """
    t = inclusive_grid(window[0], window[1], dt)
    if sigma is None:
        s = breakdown(params, derive(params), thermal, t, N).sigma_z
    else:
        s = np.asarray(sigma(t), dtype=float)
    i, j = int(np.argmax(s)), int(np.argmin(s))
    if s[i] == s[j]:
        raise GuardError("no revival detected: the inversion is flat in the window")
    return PeriodEstimate(thermal.theta, float(t[i]), float(t[j]), float(s[i]), float(s[j]))


@dataclass(frozen=True)
class FitResult:
    intercept: float
    slope: float
    rms_residual: float


def fit_line(x, y) -> FitResult:
    """Ordinary least-squares line y = intercept + slope x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise DomainError("need at least two paired points for a line fit")
    X = np.stack([np.ones_like(x), x], axis=1)
    (b, m), *_ = np.linalg.lstsq(X, y, rcond=None)
    r = y - (b + m * x)
    return FitResult(float(b), float(m), float(np.sqrt(np.mean(r * r))))


def sweep_and_fit(config: SweepConfig, N: int = DEFAULT_N, n_points: Optional[int] = None) -> Tuple[List[PeriodEstimate], FitResult]:
    """Period estimates on evenly spaced theta in [0, theta_max] and a fit of ln T against theta."""
    k = config.n_points if n_points is None else n_points
    if k < 2:
        raise DomainError("a sweep needs at least two theta points")
    p = config.params
    thetas = np.linspace(0.0, config.theta_max, k)

    def job(th):
        return estimate_period(p, thermal_from_theta(float(th), p), config.window, config.dt, N)

    # map keeps results in theta order whatever the completion order
    with ThreadPoolExecutor(max_workers=thread_count()) as ex:
        estimates = list(ex.map(job, thetas))
    fit = fit_line([e.theta for e in estimates], [math.log(e.T) for e in estimates])
    return estimates, fit


@dataclass(frozen=True)
class TableRow:
    label: str
    order: int
    kind: int
    min: float
    max: float


def reproduce_table(table_id: int, grid=None, N: int = DEFAULT_N) -> List[TableRow]:
    """Ranges of theta^n/n! P^(n) (orders 1..3, both kinds) on the table's time grid."""
    try:
        cfg = FIGURES[TABLES[table_id]]
    except KeyError:
        raise DomainError(f"no table {table_id}; choose 1 or 2") from None
    p = cfg.params
    t = cfg.grid if grid is None else np.atleast_1d(np.asarray(grid, dtype=float))
    bd = breakdown(p, derive(p), thermal_from_theta(cfg.theta, p), t, N)
    w = bd.table_weighted()
    rows = []
    for order in (1, 2, 3):
        for kind in (1, 2):
            v = w[order, kind - 1]
            rows.append(TableRow(TABLE_LABELS[(order, kind)], order, kind, float(v.min()), float(v.max())))
    return rows


@dataclass
class SpectralData:
    kappa: np.ndarray
    n_ground: np.ndarray
    gap: np.ndarray
    E00: float
    lower_branch: np.ndarray  # [kappa, n] for n = 0..n_plot
    dips: List[Tuple[float, float]] = field(default_factory=list)


def refine_gap_dips(params: ModelParams, kappa, gap, n_max: int = DEFAULT_N_MAX) -> List[Tuple[float, float]]:
    """Locally minimize the gap around every interior local minimum of a coarse scan."""
    kappa = np.asarray(kappa, dtype=float)
    gap = np.asarray(gap, dtype=float)
    out = []
    for i in range(1, len(kappa) - 1):
        if gap[i] <= gap[i - 1] and gap[i] < gap[i + 1]:
            res = minimize_scalar(
                lambda k: excitation_gap(params, k, n_max),
                bounds=(kappa[i - 1], kappa[i + 1]),
                method="bounded",
                options={"xatol": 1e-13},
            )
            out.append((float(res.x), float(res.fun)))
    return out


def spectral_figures(params: ModelParams, kappa_grid, n_max: int = DEFAULT_N_MAX, n_plot: int = 24, refine: bool = True) -> SpectralData:
    """Ground-state index, excitation gap and the lower dressed branch over a kappa grid."""
    kappa = np.asarray(kappa_grid, dtype=float)
    with ThreadPoolExecutor(max_workers=thread_count()) as ex:
        n_ground = np.array(list(ex.map(lambda k: ground_state_index(params, k, n_max), kappa)))
        gap = np.array(list(ex.map(lambda k: excitation_gap(params, k, n_max), kappa)))
    lower = np.array([[row.E_n2 for row in spectrum(params, n_plot, k)[0]] for k in kappa])
    dips = refine_gap_dips(params, kappa, gap, n_max) if refine else []
    return SpectralData(kappa, n_ground, gap, -0.5 * params.omega0, lower, dips)


SPECTRAL_DEFAULT = {"omega0": 1.0, "omega": 1.0, "kappa_max": 10.0, "points": 2001}


def default_spectral_params() -> ModelParams:
    return ModelParams(SPECTRAL_DEFAULT["omega0"], SPECTRAL_DEFAULT["omega"], 0.0, 0.0)


__all__ = [
    "BARE_GROUND",
    "FIGURES",
    "FigureConfig",
    "FitResult",
    "InversionTrace",
    "PeriodEstimate",
    "SWEEPS",
    "SpectralData",
    "SweepConfig",
    "TABLES",
    "TableRow",
    "default_spectral_params",
    "estimate_period",
    "figure_trace",
    "fit_line",
    "inclusive_grid",
    "inversion_trace",
    "refine_gap_dips",
    "reproduce_table",
    "spectral_figures",
    "sweep_and_fit",
]
