import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermal_jcm import kernels
from thermal_jcm.model import g1, poisson_weights, sin2_over_x

BACKENDS = kernels.available_backends()


def reference_block(t, w, c, kappa, l_max):
    n = np.arange(w.size, dtype=float)
    out = np.empty((2, l_max + 1, t.size))
    for l in range(l_max + 1):
        out[0, l] = g1(n[None, :] + c + l, c, kappa, t[:, None]) @ w
        x = n + c + 1 + l
        out[1, l] = (sin2_over_x(x[None, :], kappa, t[:, None]) * (n + 1 + l)) @ w
    return out


@pytest.mark.parametrize("name", BACKENDS)
class TestQBlock:
    def test_matches_reference(self, name):
        mod = kernels.load_backend(name)
        t = np.linspace(0, 40, 301)
        w = poisson_weights(3.0, 60)
        got = mod.q_block(t, w, 1.0, 1.0, 3)
        assert np.allclose(got, reference_block(t, w, 1.0, 1.0, 3), atol=1e-13, rtol=0)

    def test_t0(self, name):
        mod = kernels.load_backend(name)
        got = mod.q_block(np.zeros(1), poisson_weights(2.0, 60), 0.4, 1.0, 3)
        assert np.allclose(got[0, :, 0], 1.0, atol=1e-14)
        assert np.all(got[1, :, 0] == 0.0)

    def test_resonant_small_x_branch(self, name):
        # c = 0 puts x = 0 on the n = 0, l = 0 term
        mod = kernels.load_backend(name)
        t = np.array([0.5, 2.0])
        w = np.array([1.0])
        got = mod.q_block(t, w, 0.0, 1.5, 0)
        assert np.allclose(got[0, 0], 1.0)
        assert np.allclose(got[1, 0], np.sin(1.5 * t) ** 2)

    def test_output_shape(self, name):
        mod = kernels.load_backend(name)
        assert mod.q_block(np.zeros(7), np.ones(3), 1.0, 1.0, 2).shape == (2, 3, 7)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
@given(
    alpha=st.floats(0.0, 6.0),
    c=st.floats(0.0, 4.0),
    kappa=st.floats(-3.0, 3.0).filter(lambda k: abs(k) > 1e-3),
    t=st.lists(st.floats(0.0, 60.0), min_size=1, max_size=20),
)
@settings(max_examples=40, deadline=None)
def test_backends_agree(alpha, c, kappa, t):
    t = np.array(t)
    w = poisson_weights(alpha, 80)
    a = kernels.load_backend("cython").q_block(t, w, c, kappa, 3)
    b = kernels.load_backend("python").q_block(t, w, c, kappa, 3)
    assert np.allclose(a, b, atol=1e-12 * (1 + c), rtol=1e-12)


def test_env_forces_fallback():
    env = dict(os.environ, THERMAL_JCM_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from thermal_jcm import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_default_backend_prefers_compiled():
    if "cython" in BACKENDS and os.environ.get("THERMAL_JCM_PURE_PYTHON", "") in ("", "0"):
        assert kernels.BACKEND == "cython"
    else:
        assert kernels.BACKEND == "python"
