from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, strategies as st

from qpainleve.errors import DomainError, ModeError, PoleError
from qpainleve.qspecial import (EXACT, FLOAT, QContext, barnes_g_q, big_theta, gamma_q, heine_F,
                                heine_phi, nearest_integer, q_double_pochhammer_inf, q_number,
                                q_pochhammer_finite, q_pochhammer_inf, q_power, scalar_mode, theta)

qs = st.floats(min_value=0.1, max_value=0.7)
reals = st.floats(min_value=-2.8, max_value=2.8).filter(lambda u: abs(u - round(u)) > 0.03)


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


def test_context_parses_exact_and_float_q():
    assert QContext("2/7").mode == EXACT
    assert QContext("2/7").q == Fraction(2, 7)
    assert QContext("0.3").mode == FLOAT


@pytest.mark.parametrize("q", ["0", "1", "-1.5"])
def test_context_rejects_q_outside_unit_disc(q):
    with pytest.raises(DomainError):
        QContext(q)


def test_scalar_mode_refuses_mixing():
    with pytest.raises(ModeError):
        scalar_mode(Fraction(1, 2), mp.mpf("0.5"))
    assert scalar_mode(Fraction(1, 3), 2) == EXACT
    assert scalar_mode(mp.mpf(1)) == FLOAT


def test_exact_q_power_stays_rational():
    assert q_power(Fraction(2, 3), 3) == Fraction(8, 27)
    assert q_power(Fraction(2, 3), -2) == Fraction(9, 4)


def test_nearest_integer_detects_hits_only_within_tolerance():
    assert nearest_integer(mp.mpf(3) + mp.mpf("1e-40"), mp.mpf("1e-30")) == 3
    assert nearest_integer(mp.mpf("2.5"), mp.mpf("1e-30")) is None


def test_finite_pochhammer_matches_direct_product():
    a, q = Fraction(1, 3), Fraction(1, 2)
    direct = (1 - a) * (1 - a * q) * (1 - a * q * q)
    assert q_pochhammer_finite(a, q, 3) == direct


def test_infinite_pochhammer_against_mpmath(ctx):
    with ctx.precision():
        a = mp.mpf("0.37")
        assert rel(q_pochhammer_inf(a, ctx), mp.qp(a, ctx.q)) < mp.mpf("1e-30")


def test_infinite_pochhammer_reports_tail(ctx):
    out = q_pochhammer_inf(mp.mpf("0.37"), ctx, with_tail=True)
    assert out.converged and out.tail < mp.mpf("1e-100")


def test_double_pochhammer_shift(ctx):
    # (qa; q, q)_inf = (a; q, q)_inf / (a; q)_inf
    with ctx.precision():
        a = mp.mpf("0.41")
        lhs = q_double_pochhammer_inf(ctx.q * a, ctx)
        rhs = q_double_pochhammer_inf(a, ctx) / q_pochhammer_inf(a, ctx)
        assert rel(lhs, rhs) < mp.mpf("1e-30")


def test_gamma_q_at_positive_integers_is_q_factorial(ctx):
    with ctx.precision():
        expected = q_number(2, ctx.q) * q_number(3, ctx.q)
        assert rel(gamma_q(mp.mpf(4), ctx), expected) < mp.mpf("1e-30")
        assert rel(gamma_q(mp.mpf(1), ctx), 1) < mp.mpf("1e-30")


def test_gamma_q_poles_raise(ctx):
    with pytest.raises(PoleError):
        gamma_q(mp.mpf(-2), ctx)


def test_barnes_g_vanishes_at_nonpositive_integers(ctx):
    assert barnes_g_q(mp.mpf(0), ctx) == 0
    assert barnes_g_q(mp.mpf(-1), ctx) == 0
    with ctx.precision():
        assert rel(barnes_g_q(mp.mpf(1), ctx), 1) < mp.mpf("1e-30")


def test_theta_exact_zero_at_integers(ctx):
    assert theta(mp.mpf(0), ctx) == 0
    assert theta(mp.mpf(-3), ctx) == 0


def test_float_functions_refuse_exact_input():
    with pytest.raises(ModeError):
        gamma_q(Fraction(1, 2), QContext("1/3"))


@given(qs, reals)
def test_gamma_q_shift(q, u):
    ctx = QContext(str(q))
    with ctx.precision():
        u = mp.mpf(u)
        assert rel(gamma_q(u + 1, ctx), q_number(u, ctx.q) * gamma_q(u, ctx)) < mp.mpf("1e-25")


@given(qs, reals)
def test_barnes_g_shift(q, u):
    ctx = QContext(str(q))
    with ctx.precision():
        u = mp.mpf(u)
        assert rel(barnes_g_q(u + 1, ctx), gamma_q(u, ctx) * barnes_g_q(u, ctx)) < mp.mpf("1e-25")


@given(qs, reals, st.floats(min_value=-0.8, max_value=0.8))
def test_theta_sign_relations(q, u, v):
    ctx = QContext(str(q))
    with ctx.precision():
        z = mp.mpc(u, v)
        assert rel(theta(z + 1, ctx), -theta(z, ctx)) < mp.mpf("1e-25")
        assert rel(theta(-z, ctx), -theta(z, ctx)) < mp.mpf("1e-25")


@given(qs, st.floats(min_value=0.05, max_value=3.0), st.floats(min_value=-3.1, max_value=3.1))
def test_big_theta_quasi_periodicity(q, r, phase):
    ctx = QContext(str(q))
    with ctx.precision():
        x = mp.mpf(r) * mp.expj(phase)
        assert rel(big_theta(ctx.q * x, ctx), -big_theta(x, ctx) / x) < mp.mpf("1e-25")


def test_heine_phi_exact_terminates():
    # a = q^-1 makes the series stop after the x^1 term
    q = Fraction(1, 3)
    a, b, c, x = 1 / q, Fraction(1, 5), Fraction(2, 7), Fraction(1, 4)
    expected = 1 + (1 - a) * (1 - b) / ((1 - c) * (1 - q)) * x
    assert heine_phi(a, b, c, x, q, 10) == expected


def test_heine_phi_against_mpmath(ctx):
    with ctx.precision():
        a, b, c, x = mp.mpf("0.2"), mp.mpf("0.45"), mp.mpf("0.7"), mp.mpf("0.1")
        assert rel(heine_phi(a, b, c, x, ctx.q, 80), mp.qhyper([a, b], [c], ctx.q, x)) < mp.mpf("1e-30")


def test_heine_F_domain_and_pole_checks(ctx):
    with ctx.precision():
        with pytest.raises(DomainError):
            heine_F(mp.mpf("0.1"), mp.mpf("0.2"), mp.mpf("0.3"), mp.mpf(2), ctx)
        with pytest.raises(PoleError):
            heine_F(mp.mpf("0.1"), mp.mpf("0.2"), mp.mpf(-1), mp.mpf("0.1"), ctx)
