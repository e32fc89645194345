import mpmath as mp
import pytest
from hypothesis import given, strategies as st

from qpainleve import qpvi
from qpainleve.errors import SingularityError
from qpainleve.qpvi import State, params_from_thetas, qpvi_residual, qpvi_step, qpvi_step_inverse
from qpainleve.qspecial import QContext
from qpainleve.tau import bilinear_base, tau_family, tau_formula_family

from conftest import theta_params


def mpf(x):
    return mp.mpf(x)


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


PARAMS = ("0.317", "0.241", "0.153", "0.382")
values = st.floats(min_value=0.2, max_value=5.0)


def map_params(ctx):
    return params_from_thetas(*map(mpf, PARAMS), ctx.q)


@given(values, values, st.floats(min_value=0.005, max_value=0.1))
def test_step_then_inverse_is_identity(y, z, t):
    ctx = QContext("0.3")
    with ctx.precision():
        p = map_params(ctx)
        start = State(mpf(y), mpf(z), mpf(t))
        back = qpvi_step_inverse(qpvi_step(start, p, ctx.q), p, ctx.q)
        assert rel(back.y, start.y) < mpf("1e-25") and rel(back.z, start.z) < mpf("1e-25")
        assert rel(back.t, start.t) < mpf("1e-35")


@given(values, values)
def test_step_satisfies_both_equations(y, z):
    ctx = QContext("0.3")
    with ctx.precision():
        p = map_params(ctx)
        s0 = State(mpf(y), mpf(z), mpf("0.02"))
        s1 = qpvi_step(s0, p, ctx.q)
        assert max(qpvi_residual(s0.y, s0.z, s1.y, s1.z, s0.t, p, ctx.q)) < mpf("1e-30")


def test_step_singularity(ctx):
    with ctx.precision():
        p = map_params(ctx)
        with pytest.raises(SingularityError):
            qpvi_step(State(p.a3, mpf(1), mpf("0.02")), p, ctx.q)
        with pytest.raises(SingularityError):
            qpvi_step(State(mpf(1), mpf(0), mpf("0.02")), p, ctx.q)


def test_w_vanishes_at_half_theta_inf(small_ctx):
    base = theta_params(small_ctx, ("0.317", "0.241", "0.153", "0.5", "0.271", "0.83"))
    assert qpvi.w_from_tau(tau_formula_family(base), mpf("0.02"), small_ctx) == 0


@pytest.fixture
def tau_ctx():
    return QContext("0.3", weight_cap=6, fourier_window=4)


@pytest.fixture
def tau_base(tau_ctx):
    return theta_params(tau_ctx, ("0.317", "0.241", "0.153", "0.382", "0.271", "0.83"))


def test_tau_solution_satisfies_map(tau_ctx, tau_base):
    reports = qpvi.qpvi_report(tau_base, mpf("0.02"), tau_ctx, steps=2, tol=mpf("1e-6"), probe=True)
    steps = [r for r in reports if r.identity == "qpvi_step"]
    assert all(r.passed for r in reports)
    for r in steps:
        # the time argument is taken as written; pairing it with q t instead breaks the identity
        assert r.witness["shifted_convention"]["r1"] > 1e3 * r.witness["r1"]


def test_bilinear_relations(tau_ctx, tau_base):
    res = qpvi.bilinear_residuals(tau_family(bilinear_base(tau_base)), mpf("0.02"), tau_ctx)
    assert set(res) == set(qpvi.BILINEAR_NAMES)
    assert max(res.values()) < mpf("1e-8")


def test_bilinear_relations_need_eight_members(tau_ctx, tau_base):
    with pytest.raises(ValueError):
        qpvi.bilinear_residuals(tau_formula_family(tau_base), mpf("0.02"), tau_ctx)


def test_two_z_formulas_agree(tau_ctx, tau_base):
    a, b, r = qpvi.z_crosscheck(tau_base, mpf("0.02"), tau_ctx)
    assert r < mpf("1e-8")


def test_trace_follows_tau_orbit(tau_ctx, tau_base):
    rows = qpvi.trace(tau_base, mpf("0.02"), tau_ctx, 2)
    assert [r["step"] for r in rows] == [0, 1, 2]
    assert rows[0]["deviation"] == 0
    assert max(r["deviation"] for r in rows) < mpf("1e-6")
