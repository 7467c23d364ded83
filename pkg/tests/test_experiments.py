import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermal_jcm.errors import DomainError, GuardError
from thermal_jcm.experiments import (
    FIGURES,
    SWEEPS,
    SweepConfig,
    estimate_period,
    figure_trace,
    fit_line,
    inclusive_grid,
    reproduce_table,
    spectral_figures,
    sweep_and_fit,
)
from thermal_jcm.model import ModelParams, thermal_from_theta
from thermal_jcm.zero_temp import envelope_approx


class TestGrid:
    def test_figure_grid(self):
        g = FIGURES[1].grid
        assert g.size == 10001 and g[0] == 0.0
        assert g[-1] == pytest.approx(20 * math.pi, abs=1e-12)

    @given(st.floats(-10, 10), st.floats(1e-3, 1), st.integers(1, 500))
    def test_inclusive(self, t0, dt, m):
        g = inclusive_grid(t0, t0 + m * dt, dt)
        assert g.size == m + 1 and g[-1] == pytest.approx(t0 + m * dt)

    def test_errors(self):
        with pytest.raises(DomainError):
            inclusive_grid(0, 1, 0)
        with pytest.raises(DomainError):
            inclusive_grid(1, 0, 0.1)

    def test_sweep_presets(self):
        assert SWEEPS[5].alpha == 4.0 and SWEEPS[5].theta_max == pytest.approx(math.pi / 32)
        assert SWEEPS[6].dt == pytest.approx(1e-3 * math.pi)


class TestPeriod:
    p4 = ModelParams(2.0, 4.0, 1.0, 4.0)

    def test_synthetic_envelope(self):
        # the approximate inversion revives at 2 pi alpha / kappa
        dt = 1e-3
        est = estimate_period(self.p4, thermal_from_theta(0.0, self.p4), (6 * math.pi, 10 * math.pi), dt,
                              sigma=lambda t: envelope_approx(4.0, 1.0, t))
        assert abs(est.T - 8 * math.pi) < math.pi / 4 + dt

    def test_zero_temperature_period(self):
        est = estimate_period(self.p4, thermal_from_theta(0.0, self.p4), (7.5 * math.pi, 10 * math.pi), 5e-4 * math.pi)
        # detuning moves the revival to 2 pi sqrt(alpha^2 + c); allow half a Rabi cycle
        revival = 2 * math.pi * math.sqrt(16 + 1)
        half_rabi = 0.5 * math.pi / math.sqrt(16 + 1)
        assert abs(est.T - revival) < half_rabi

    def test_flat_signal(self):
        with pytest.raises(GuardError):
            estimate_period(self.p4, thermal_from_theta(0.0, self.p4), (0, 1), 0.1, sigma=np.zeros_like)

    def test_max_min_are_grid_points(self):
        dt = 5e-4 * math.pi
        est = estimate_period(self.p4, thermal_from_theta(math.pi / 32, self.p4), (7.5 * math.pi, 10 * math.pi), dt)
        for v in (est.t_max, est.t_min):
            k = (v - 7.5 * math.pi) / dt
            assert abs(k - round(k)) < 1e-6


class TestFit:
    def test_exact_line(self):
        x = np.linspace(0, 1, 9)
        f = fit_line(x, 3.25 + 0.988 * x)
        assert f.intercept == pytest.approx(3.25) and f.slope == pytest.approx(0.988)
        assert f.rms_residual < 1e-14

    def test_needs_points(self):
        with pytest.raises(DomainError):
            fit_line([1.0], [2.0])

    def test_short_sweep(self):
        cfg = SweepConfig(alpha=4.0, theta_max=math.pi / 32, window=(7.5 * math.pi, 10 * math.pi), dt=5e-4 * math.pi, n_points=5)
        est, fit = sweep_and_fit(cfg)
        assert [e.theta for e in est] == pytest.approx(list(np.linspace(0, math.pi / 32, 5)))
        assert fit.slope > 0
        again, fit2 = sweep_and_fit(cfg)
        assert fit2 == fit and [e.T for e in again] == [e.T for e in est]

    def test_sweep_needs_two(self):
        with pytest.raises(DomainError):
            sweep_and_fit(SWEEPS[5], n_points=1)


class TestTablesAndTraces:
    def test_unknown(self):
        with pytest.raises(DomainError):
            reproduce_table(3)
        with pytest.raises(DomainError):
            figure_trace(5)

    def test_table_layout(self):
        rows = reproduce_table(1, grid=np.linspace(0, 20 * math.pi, 101))
        assert [(r.order, r.kind) for r in rows] == [(o, k) for o in (1, 2, 3) for k in (1, 2)]
        assert all(r.min <= r.max for r in rows)

    def test_grid_zero(self):
        for r in reproduce_table(2, grid=[0.0]):
            assert abs(r.min) < 1e-12 and abs(r.max) < 1e-12

    def test_trace_zero_start(self):
        tr = figure_trace(1)
        assert tr.t.size == 10001 and tr.sigma_z[0] == pytest.approx(-1.0)


class TestSpectral:
    def test_small_scan(self):
        p = ModelParams(1.0, 1.0, 0.0, 0.0)
        sd = spectral_figures(p, np.linspace(0, 3, 61), n_plot=5)
        assert sd.n_ground[0] == -1 and sd.gap[0] == 1.0
        assert sd.lower_branch.shape == (61, 6)
        ks = [k for k, g in sd.dips]
        assert any(abs(k - 1.0) < 1e-6 for k in ks)
        assert any(abs(k - (1 + math.sqrt(2))) < 1e-6 for k in ks)
        assert all(g < 1e-6 for _, g in sd.dips)
