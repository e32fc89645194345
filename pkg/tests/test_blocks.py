import mpmath as mp
import pytest
from hypothesis import given, strategies as st

from qpainleve import blocks
from qpainleve.blocks import (HALF, BlockSpec, Matrix2, block_coefficients, braiding_matrix,
                              braiding_properties, conformal_block, degenerate_block_4pt,
                              degenerate_block_spec, relative_difference)
from qpainleve.errors import DomainError, ResonanceError, SingularityError
from qpainleve.partitions import EMPTY, Partition
from qpainleve.qspecial import QContext, q_power

from oracles import first_order_coefficient


def mpf(x):
    return mp.mpf(x)


# ---------------------------------------------------------------------------
# Matrix2


def test_matrix_algebra():
    with mp.workprec(128):
        A = Matrix2(mpf(1), mpf(2), mpf(3), mpf(4))
        assert A[1, -1] == 2 and A[-1, 1] == 3
        assert A.det() == -2
        assert relative_difference(A @ A.inverse(), Matrix2.identity()) < mpf("1e-35")
        assert (A + A - A).entries() == A.entries()
        assert Matrix2.swap(mpf(5)) @ Matrix2.swap(mpf(5)) == Matrix2.identity().scale(5)


def test_singular_matrix_refuses_inverse():
    with pytest.raises(SingularityError):
        Matrix2(mpf(1), mpf(2), mpf(2), mpf(4)).inverse()


# ---------------------------------------------------------------------------
# the partition sum


def test_first_order_coefficient_by_cells(ctx):
    with ctx.precision():
        thetas = (mpf("0.21"), mpf("0.34"))
        sig = (mpf("0.13"), mpf("0.29"), mpf("0.41"))
        coeffs = block_coefficients(thetas, sig, ctx, 3)
        assert coeffs[(0,)] == 1
        assert relative_difference(coeffs[(1,)], first_order_coefficient(thetas, sig, ctx.q)) < mpf("1e-30")


def test_one_insertion_block_is_prefactor_only(ctx):
    with ctx.precision():
        spec = BlockSpec((mpf("0.2"),), (), mpf("0.3"), mpf("0.4"), (mpf("0.7"),), ctx)
        assert block_coefficients(spec.thetas, spec.full_sigmas, ctx) == {(): 1}


def test_resonant_internal_weight_raises(ctx):
    with ctx.precision():
        with pytest.raises(ResonanceError):
            block_coefficients((mpf("0.2"), mpf("0.3")), (mpf("0.1"), mpf("0.5"), mpf("0.4")), ctx, 2)


def test_pinned_edge_restricts_the_sum(ctx):
    with ctx.precision():
        thetas = (mpf("0.21"), mpf("0.34"))
        sig = (mpf("0.13"), mpf("0.29"), mpf("0.41"))
        pinned = block_coefficients(thetas, sig, ctx, 3, fixed={1: (EMPTY, EMPTY)})
        assert pinned == {(0,): 1}


# ---------------------------------------------------------------------------
# degenerate blocks against their closed forms

DEGENERATE_POINT = ("0.382", "0.213", "0.271")


@pytest.mark.parametrize("side", ["left", "right"])
@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("ratio", ["0.05", "0.2"])
def test_degenerate_series_matches_closed_form(ctx, side, sign, ratio):
    with ctx.precision():
        thi, th1, th0 = map(mpf, DEGENERATE_POINT)
        x1 = mpf("1.3")
        x2 = (mpf(ratio) * x1 / q_power(ctx.q, 2 * th1) if side == "left" else ctx.q * x1 / mpf(ratio))
        series = conformal_block(degenerate_block_spec(side, sign, thi, th1, th0, x1, x2, ctx), 10)
        closed = degenerate_block_4pt(side, sign, thi, th1, th0, x1, x2, ctx, order=10)
        assert relative_difference(series, closed) < mpf("1e-20")


def test_closed_form_domain_check(ctx):
    with ctx.precision():
        with pytest.raises(DomainError):
            degenerate_block_4pt("right", 1, *map(mpf, DEGENERATE_POINT), mpf(1), ctx.q / 2, ctx)


# ---------------------------------------------------------------------------
# braiding matrix

generic = st.tuples(*(st.floats(min_value=-0.9, max_value=0.9) for _ in range(3)),
                    st.floats(min_value=-1.5, max_value=1.5), st.floats(min_value=-0.6, max_value=0.6))


def _far_from_resonance(point):
    th1, thi, th0, ur, ui = (mpf(v) for v in point)
    u = mp.mpc(ur, ui)
    watched = [2 * th0, 2 * thi, 2 * th1 + u, u]
    watched += [HALF + a * thi + th1 + b * th0 for a in (1, -1) for b in (1, -1)]
    return min(blocks.distance_to_integers(z) for z in watched) > 0.05


@given(generic.filter(_far_from_resonance))
def test_braiding_properties_hold(point):
    ctx = QContext("0.3")
    with ctx.precision():
        th1, thi, th0, ur, ui = (mpf(v) for v in point)
        res = braiding_properties(th1, thi, th0, mp.mpc(ur, ui), ctx)
        assert max(res.values()) < mpf("1e-25")


def test_braiding_matrix_resonance(ctx):
    with ctx.precision():
        with pytest.raises(ResonanceError):
            braiding_matrix(mpf("0.2"), mpf("0.3"), mpf("0.5"), None, ctx, u=mpf("0.1"))


def test_braiding_suite_is_seeded(ctx):
    a = [r.to_json() for r in blocks.braiding_suite(ctx, points=3, seed=7)]
    b = [r.to_json() for r in blocks.braiding_suite(ctx, points=3, seed=7)]
    assert a == b
    assert all('"pass": true' in s for s in a)


# ---------------------------------------------------------------------------
# braiding relation and its consistency checks

BRAID_CTX = QContext("0.05")


def braid_point():
    with BRAID_CTX.precision():
        thi, th1, sig = mpf("0.382"), mpf("0.7"), mpf("0.271")
        x1 = mpf("1.1")
        return thi, th1, sig, x1, x1 * BRAID_CTX.q ** (HALF - th1)


P = Partition


@pytest.mark.parametrize("quad", [
    (EMPTY, EMPTY, EMPTY, EMPTY),
    (P((1,)), EMPTY, EMPTY, EMPTY),
    (EMPTY, P((1,)), P((1,)), EMPTY),
    (EMPTY, EMPTY, P((2,)), P((1,))),
    (P((1, 1)), EMPTY, EMPTY, P((1,))),
])
def test_braiding_relation(quad):
    thi, th1, sig, x1, x2 = braid_point()
    res = blocks.braiding_identity_residual(*quad, thi, th1, sig, x1, x2, BRAID_CTX, 12)
    assert res < mpf("1e-12")


def test_vacuum_element_is_heine_series():
    thi, th1, sig, x1, x2 = braid_point()
    for ep in (1, -1):
        assert blocks.vacuum_heine_residual(ep, thi, th1, sig, x1, x2, BRAID_CTX) < mpf("1e-30")


@pytest.mark.parametrize("lam", [P((1,)), P((2,)), P((1, 1))])
def test_reduction_holds_and_naive_forms_fail(lam):
    thi, th1, sig, x1, x2 = braid_point()
    res = blocks.braiding_reduction_residuals(lam, P((1,)), EMPTY, P((1,)), thi, th1, sig, x1, x2, BRAID_CTX)
    assert max(res[k] for k in ("X+", "X-", "Y+", "Y-")) < mpf("1e-12")
    assert res["X-_literal"] > mpf("1e-3") and res["Y-_literal"] > mpf("1e-3")


def test_reduction_needs_nonempty_lambda():
    thi, th1, sig, x1, x2 = braid_point()
    with pytest.raises(ValueError):
        blocks.braiding_reduction_residuals(EMPTY, EMPTY, EMPTY, EMPTY, thi, th1, sig, x1, x2, BRAID_CTX)


@pytest.mark.parametrize("eps_p", [1, -1])
def test_six_point_block_reproduces_matrix_element(eps_p):
    thi, th1, sig, x1, x2 = braid_point()
    report = blocks.check_six_point_extraction(eps_p, P((1,)), EMPTY, EMPTY, P((1,)), thi, th1, sig,
                                               x1, x2, BRAID_CTX, K=6)
    assert report.passed, report.witness


def test_quadruple_count():
    # coefficients of P(x)^4 are 1, 4, 14, 40
    assert len(blocks.quadruples(3)) == 59
    assert len(blocks.quadruples(1)) == 5
