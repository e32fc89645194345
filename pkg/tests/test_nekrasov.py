from fractions import Fraction

import mpmath as mp
from hypothesis import given, strategies as st

from qpainleve.nekrasov import (check_delta, check_nonvanishing, check_reduction_identity,
                                check_rule1, check_rule2, check_transpose, classify_nonvanishing,
                                nekrasov, nekrasov_power, partition_identity_suite)
from qpainleve.partitions import EMPTY, Partition, arm, leg, partitions_of

partitions = st.integers(min_value=0, max_value=5).flatmap(lambda n: st.sampled_from(partitions_of(n)))
rationals = st.fractions(min_value=Fraction(1, 9), max_value=Fraction(8, 9), max_denominator=40)


def nekrasov_by_cells(lam, mu, w, q):
    """Direct product over cells, written out from arm and leg."""
    out = Fraction(1)
    for i, row in enumerate(lam, 1):
        for j in range(1, row + 1):
            out *= 1 - q ** (-leg(lam, i, j) - arm(mu, i, j) - 1) * w
    for i, row in enumerate(mu, 1):
        for j in range(1, row + 1):
            out *= 1 - q ** (arm(lam, i, j) + leg(mu, i, j) + 1) * w
    return out


def test_small_factor_by_hand():
    q, w = Fraction(1, 2), Fraction(1, 3)
    # lam = (1), mu = empty: one cell with leg 0, arm_mu = -1, exponent 0
    assert nekrasov((1,), EMPTY, w, q) == 1 - w
    # lam = empty, mu = (1): arm_lam = -1, leg_mu = 0, exponent 0
    assert nekrasov(EMPTY, (1,), w, q) == 1 - w
    assert nekrasov(EMPTY, EMPTY, w, q) == 1


@given(partitions, partitions, rationals, rationals)
def test_matches_cell_product(lam, mu, w, q):
    assert nekrasov(lam, mu, w, q) == nekrasov_by_cells(lam, mu, w, q)


@given(partitions, partitions, rationals, rationals)
def test_rule1_and_transpose_exact(lam, mu, w, q):
    assert check_rule1(lam, mu, w, q).passed
    assert check_transpose(lam, mu, w, q).passed


@given(partitions, rationals)
def test_rule2_exact(lam, q):
    assert check_rule2(lam, q).passed


@given(partitions, partitions)
def test_delta_exact(lam, mu):
    assert check_delta(lam, mu, Fraction(2, 7)).passed


@given(partitions, partitions)
def test_nonvanishing_classification(lam, eta):
    assert check_nonvanishing(lam, eta, Fraction(3, 11)).passed


def test_nonvanishing_example():
    is_zero, n = classify_nonvanishing(Partition((2, 1)), Partition((3,)), Fraction(1, 3))
    assert not is_zero and n == 1


def test_power_form_detects_exact_zero():
    q = mp.mpf("0.3")
    tol = mp.mpf("1e-30")
    # exponents of N_{(1),()} are (0,), so q^0 hits the zero
    assert nekrasov_power((1,), (), mp.mpf(0) + mp.mpf("1e-40"), q, tol) == 0
    assert nekrasov_power((1,), (), mp.mpf("0.5"), q, tol) != 0


def test_power_form_agrees_with_direct_factor():
    with mp.workprec(128):
        q = mp.mpf("0.3")
        u = mp.mpf("0.37")
        a = nekrasov_power((2, 1), (1,), u, q, mp.mpf("1e-30"))
        b = nekrasov((2, 1), (1,), q ** u, q)
        assert abs(a - b) < mp.mpf("1e-30")


def test_float_mode_uses_tolerance():
    r = check_rule1((2,), (1,), mp.mpf("0.37"), mp.mpf("0.3"))
    assert r.passed and r.mode == "float"


@given(st.integers(min_value=1, max_value=6), partitions.filter(bool), partitions,
       st.integers(min_value=0, max_value=4))
def test_reduction_identities_exact(which, lam, mu, n):
    assert check_reduction_identity(which, lam, mu, n, Fraction(3, 5), Fraction(2, 7)).passed


def test_small_suite_all_pass():
    reports = partition_identity_suite(weight_cap=2, n_max=2, pair_weight_cap=3)
    names = [r.identity for r in reports]
    assert names[:5] == ["transpose", "rule1", "rule2", "delta", "nonvanishing"]
    assert names[5:] == [f"reduction_{w}" for w in range(1, 7)]
    assert all(r.passed for r in reports)
