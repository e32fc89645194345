import pytest
from hypothesis import HealthCheck, settings

from qpainleve.qspecial import QContext
from qpainleve.tau import ThetaParams

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# Lines pushed here by the acceptance tests are echoed in the terminal summary.
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def ctx():
    return QContext("0.3")


@pytest.fixture
def small_ctx():
    """Cheap truncation orders for unit tests of the tau machinery."""
    return QContext("0.3", weight_cap=4, fourier_window=3)


THETA_KEYS = ("theta0", "theta_t", "theta1", "theta_inf", "sigma", "s")


def theta_params(ctx, values):
    with ctx.precision():
        return ThetaParams.parse(ctx, **dict(zip(THETA_KEYS, values)))


@pytest.fixture
def generic_params(small_ctx):
    return theta_params(small_ctx, ("0.317", "0.241", "0.153", "0.382", "0.271", "0.83"))
