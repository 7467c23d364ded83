import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermal_jcm.errors import DomainError, GuardError, VerificationError
from thermal_jcm.expansion import sigma_z_thermal
from thermal_jcm.model import ModelParams, derive, thermal_from_theta
from thermal_jcm.oracle import (
    ALL_IDENTITIES,
    CATALOG,
    FockMatrix,
    OracleConfig,
    certify_truncation,
    coherent_vector,
    exact_pg,
    four_register_pg,
    ladder_commutator_deviation,
    mean_photon_closed_form,
    mean_photon_first_mode,
    monomial_scale,
    rabi_short_time_coefficient,
    reduced_thermal_density_checks,
    two_mode_operators,
    two_mode_squeeze_apply,
    verify_all,
    verify_identity,
)
from thermal_jcm.zero_temp import pg_zero

CFG = OracleConfig(dim=48)
SMALL = OracleConfig(dim=24, safe_buffer=8)


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(dim=4), dict(dim=16, safe_buffer=0), dict(dim=16, safe_buffer=16), dict(taylor_tol=0.0)])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            OracleConfig(**kw)


class TestFockMatrix:
    def test_real_storage(self):
        m = FockMatrix(4, ("boson",), np.eye(4, dtype=complex))
        assert m.data.dtype == np.float64

    def test_shape_check(self):
        with pytest.raises(DomainError):
            FockMatrix(4, ("boson", "tilde-boson"), np.eye(4))

    def test_immutable(self):
        m = FockMatrix(3, ("boson",), np.eye(3))
        with pytest.raises(ValueError):
            m.data[0, 0] = 2.0

    def test_ladder_commutator(self):
        assert ladder_commutator_deviation(OracleConfig(dim=16, safe_buffer=2)) < 1e-13

    def test_edge_breaks_ladder_commutator(self):
        o = two_mode_operators(8)
        full = np.abs(o.a.comm(o.ad).data - o.I.data).max()
        assert full > 1.0  # the top level carries 1 - dim


class TestCoherent:
    def test_vacuum(self):
        v = coherent_vector(0.0, 10)
        assert v[0] == 1 and np.count_nonzero(v) == 1

    def test_closed_form(self):
        v = coherent_vector(2.0, 48)
        n = np.arange(48)
        ref = np.array([math.exp(-2.0) * 2.0**k / math.sqrt(math.factorial(k)) for k in n])
        assert np.allclose(v.real, ref, atol=1e-15) and np.all(v.imag == 0)

    def test_mean(self):
        v = coherent_vector(2.0, 48)
        assert float(np.arange(48) @ np.abs(v) ** 2) == pytest.approx(4.0, abs=1e-10)

    def test_guard(self):
        with pytest.raises(GuardError, match="increase dim"):
            coherent_vector(4.0, 20)


class TestSqueeze:
    def test_identity_at_zero(self):
        psi = np.kron(coherent_vector(1.0, 24), coherent_vector(1.0, 24))
        assert np.array_equal(two_mode_squeeze_apply(0.0, psi, OracleConfig(dim=24)), psi)

    def test_thermal_vacuum(self):
        th = 0.3
        vac = np.zeros(48 * 48, dtype=complex)
        vac[0] = 1
        out = two_mode_squeeze_apply(th, vac, CFG).reshape(48, 48)
        n = np.arange(48)
        assert np.allclose(np.diag(out).real, np.tanh(th) ** n / math.cosh(th), atol=1e-12)
        assert np.abs(out - np.diag(np.diag(out))).max() < 1e-12

    @given(st.floats(0, 0.3), st.floats(0, 2))
    @settings(max_examples=15, deadline=None)
    def test_norm(self, theta, alpha):
        v = coherent_vector(alpha, 48)
        out = two_mode_squeeze_apply(theta, np.kron(v, v), CFG)
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-10)

    def test_mean_photon(self):
        assert mean_photon_first_mode(2.0, 0.3, CFG) == pytest.approx(mean_photon_closed_form(2.0, 0.3), abs=1e-8)

    def test_leakage_guard(self):
        with pytest.raises(GuardError, match="increase dim"):
            v = coherent_vector(2.0, 32)
            two_mode_squeeze_apply(1.0, np.kron(v, v), OracleConfig(dim=32))

    def test_negative_theta(self):
        with pytest.raises(DomainError):
            two_mode_squeeze_apply(-0.1, np.ones(64), OracleConfig(dim=8))


class TestReductions:
    def test_pure_at_zero(self):
        assert reduced_thermal_density_checks(0.0, CFG) == 0.0

    @pytest.mark.parametrize("angle", [0.1, 0.3031825117149942, 1.2])
    def test_fermion(self, angle):
        assert reduced_thermal_density_checks(angle, CFG, kind="fermion") < 1e-15

    def test_boson(self):
        assert reduced_thermal_density_checks(0.3, CFG) < 1e-10

    def test_kind(self):
        with pytest.raises(DomainError):
            reduced_thermal_density_checks(0.1, CFG, kind="anyon")


@pytest.fixture
def alpha2():
    p = ModelParams(2.0, 4.0, 1.0, 2.0)
    return p, derive(p)


class TestExactPg:
    def test_zero_temperature(self, alpha2):
        p, d = alpha2
        t = np.linspace(0, 30, 61)
        got = exact_pg(p, d, thermal_from_theta(0.0, p), t, CFG)
        assert np.max(np.abs(got - pg_zero(p, d, t))) < 1e-10

    def test_t0(self, alpha2):
        p, d = alpha2
        th = thermal_from_theta(math.pi / 64, p)
        assert exact_pg(p, d, th, 0.0, CFG) == pytest.approx(th.cos2_Theta, abs=1e-14)

    @given(st.floats(0, 0.25), st.floats(0, 40))
    @settings(max_examples=20, deadline=None)
    def test_bounds(self, theta, t):
        p = ModelParams(2.0, 4.0, 1.0, 2.0)
        v = exact_pg(p, derive(p), thermal_from_theta(theta, p), t, CFG)
        assert -1e-12 <= v <= 1 + 1e-12

    def test_dimension_certificate(self, alpha2):
        p, d = alpha2
        th = thermal_from_theta(math.pi / 64, p)
        assert certify_truncation(p, d, th, np.array([3.0, 5.0, 8.0]), CFG) < 1e-10

    def test_close_to_expansion(self, alpha2):
        p, d = alpha2
        errs = []
        for theta in (math.pi / 64, math.pi / 128):
            th = thermal_from_theta(theta, p)
            s, _ = sigma_z_thermal(p, d, th, 5.0)
            errs.append(abs(s - (1 - 2 * exact_pg(p, d, th, 5.0, CFG))))
        assert errs[0] < 1e-4 and 8 < errs[0] / errs[1] < 32

    def test_four_register_reduction(self, alpha2):
        p, d = alpha2
        th = thermal_from_theta(math.pi / 64, p)
        for t in (0.7, 5.0):
            full, reduced = four_register_pg(p, d, th, t, OracleConfig(dim=32))
            assert abs(full - reduced) < 1e-12
            assert reduced == pytest.approx(exact_pg(p, d, th, t, OracleConfig(dim=32)), abs=1e-12)


class TestIdentities:
    def test_catalog_size(self):
        assert len(CATALOG) >= 20 and len(set(ALL_IDENTITIES)) == len(ALL_IDENTITIES)

    def test_a_b(self):
        assert verify_identity("A_B", 0, OracleConfig(dim=16)) < 1e-12

    def test_bn_shift(self):
        assert verify_identity("A_Bn_shift", 4, OracleConfig(dim=16)) < 1e-10

    def test_s_n(self):
        assert verify_identity("S_n", 3, OracleConfig(dim=16)) < 1e-10

    @pytest.mark.parametrize("key", ["rearr2_A2", "rearr3_numu2", "double_comm", "R_n_expansion"])
    def test_number_basis_agrees(self, key):
        # products of the normalized matrices carry only rounding
        assert verify_identity(key, 3, OracleConfig(dim=16), c=0.37, basis="number") < 1e-9

    def test_wrong_sign_is_caught(self):
        o = two_mode_operators(16, 0.375, "monomial")
        dev = o.A.comm(o.B).safe_deviation(o.C, 8, monomial_scale(16, 2))
        assert dev > 0.5

    def test_wrong_shift_is_caught(self):
        o = two_mode_operators(16, 0.375, "monomial")
        dev = (o.mu @ o.Bp(0, 3)).safe_deviation(o.Bp(1, 3) @ o.mu, 8, monomial_scale(16, 2))
        assert dev > 0.5

    def test_headroom(self):
        with pytest.raises(DomainError, match="increase dim"):
            verify_identity("A_Bn_shift", 9, SMALL)

    def test_unknown(self):
        with pytest.raises(DomainError):
            verify_identity("nope", 1, SMALL)

    def test_verify_all_raises(self):
        out = verify_all(OracleConfig(dim=12, safe_buffer=4), n_max=2)
        assert max(out.values()) < 1e-9
        with pytest.raises(VerificationError):
            verify_all(OracleConfig(dim=12, safe_buffer=4), n_max=2, tol=-1.0, raise_on_fail=True)


class TestShortTimeOracle:
    res = ModelParams(1.0, 1.0, 1.0, 0.0)

    @pytest.mark.parametrize("alpha,phi,expected", [(0.0, 0.0, -2.0), (2.0, math.pi / 2, -2.0), (2.0, 0.0, -34.0)])
    def test_coefficient(self, alpha, phi, expected):
        q = rabi_short_time_coefficient(self.res, alpha, phi, OracleConfig(dim=40))
        assert q == pytest.approx(expected, rel=1e-3)

    def test_off_resonance(self):
        with pytest.raises(DomainError):
            rabi_short_time_coefficient(ModelParams(1.0, 2.0, 1.0, 0.0), 1.0, 0.0, OracleConfig(dim=24))
