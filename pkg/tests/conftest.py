import math

import pytest

from thermal_jcm.model import ModelParams, derive

# acceptance results collected by tests/test_acceptance.py, printed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line[1])


@pytest.fixture
def record():
    def _record(number, name, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE.append((number, f"[{status}] criterion {number:2d}: {name}  {detail}"))
        print(ACCEPTANCE[-1][1])

    return _record


@pytest.fixture
def fig2_params():
    p = ModelParams(omega0=2.0, omega=4.0, kappa=1.0, alpha=4.0)
    return p, derive(p)


@pytest.fixture
def alpha2_params():
    p = ModelParams(omega0=2.0, omega=4.0, kappa=1.0, alpha=2.0)
    return p, derive(p)


THETA_FIG2 = math.pi / 32
THETA_FIG4 = math.pi / 60
