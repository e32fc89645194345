"""Nekrasov factors and exact checks of the identities they satisfy.

N_{lam,mu}(w) = prod_{s in lam} (1 - q^(-leg_lam(s) - arm_mu(s) - 1) w)
              * prod_{s in mu}  (1 - q^(arm_lam(s) + leg_mu(s) + 1) w)

Every exponent is an integer, so with rational q and w the factor is an
exact rational number.  The ``check_*`` functions compare two sides of an
identity and return a :class:`Report`; with exact inputs they demand
equality, with floating inputs a relative tolerance.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache

import mpmath as mp

from .errors import ResonanceError
from .partitions import (Partition, arm, bar, conjugate, enumerate_upto, f_factor, leg, r_n,
                         stats)
from .qspecial import EXACT, FLOAT, Scalar, is_exact, nearest_integer, q_power, scalar_mode
from .report import Report, merge


@lru_cache(maxsize=None)
def nekrasov_exponents(lam: tuple, mu: tuple) -> tuple[int, ...]:
    """Integer exponents e with N_{lam,mu}(w) = prod (1 - q^e w)."""
    out = []
    for i, row in enumerate(lam, 1):
        for j in range(1, row + 1):
            out.append(-leg(lam, i, j) - arm(mu, i, j) - 1)
    for i, row in enumerate(mu, 1):
        for j in range(1, row + 1):
            out.append(arm(lam, i, j) + leg(mu, i, j) + 1)
    return tuple(out)


def nekrasov(lam, mu, w: Scalar, q: Scalar) -> Scalar:
    """N_{lam,mu}(w) for an arbitrary argument w."""
    scalar_mode(w, q)
    result = Fraction(1) if is_exact(w) and is_exact(q) else mp.mpf(1)
    for e in nekrasov_exponents(tuple(lam), tuple(mu)):
        result *= 1 - q_power(q, e) * w
    return result


@lru_cache(maxsize=1 << 20)
def nekrasov_power(lam: tuple, mu: tuple, u, q, tol) -> Scalar:
    """N_{lam,mu}(q^u); a factor whose exponent cancels to zero gives an exact 0."""
    exps = nekrasov_exponents(lam, mu)
    if not exps:
        return mp.mpf(1)
    n = nearest_integer(u, tol)
    if n is not None:
        if -n in exps:
            return mp.mpf(0)
        u = n
    w = q_power(q, u)
    result = mp.mpf(1)
    for e in exps:
        result *= 1 - _int_power(q, e) * w
    return result


@lru_cache(maxsize=1 << 16)
def _int_power(q, e: int):
    return q ** e


# ---------------------------------------------------------------------------
# identity checks


def _compare(identity: str, lhs, rhs, params: dict, tol=None) -> Report:
    mode = scalar_mode(lhs, rhs)
    if mode == EXACT:
        ok = lhs == rhs
        witness = None if ok else {"lhs": lhs, "rhs": rhs}
        return Report(identity, params, EXACT, ok, witness)
    scale = max(abs(lhs), abs(rhs))
    residual = abs(lhs - rhs) / scale if scale else mp.mpf(0)
    tol = mp.mpf(2) ** (-mp.mp.prec // 2) if tol is None else tol
    return Report(identity, params, FLOAT, bool(residual <= tol), {"residual": residual})


def _pp(**kwargs) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in kwargs.items()}


def check_rule1(lam, mu, w: Scalar, q: Scalar, tol=None) -> Report:
    """N_{lam,mu}(w) = N_{mu,lam}(1/w) w^(|lam|+|mu|) f_lam / f_mu."""
    lhs = nekrasov(lam, mu, w, q)
    rhs = nekrasov(mu, lam, 1 / w, q) * w ** (sum(lam) + sum(mu)) * f_factor(lam, q) / f_factor(mu, q)
    return _compare("rule1", lhs, rhs, _pp(lam=lam, mu=mu, w=w, q=q), tol)


def check_rule2(lam, q: Scalar, tol=None) -> Report:
    """(q^n(lam') / c_lam)^2 = f_lam q^(-|lam|) / N_{lam,lam}(1)."""
    from .partitions import c_lambda

    s = stats(lam)
    lhs = (q_power(q, s.n_conjugate) / c_lambda(lam, q)) ** 2
    rhs = f_factor(lam, q) * q_power(q, -sum(lam)) / nekrasov(lam, lam, q ** 0, q)
    return _compare("rule2", lhs, rhs, _pp(lam=lam, q=q), tol)


def check_transpose(lam, mu, u: Scalar, q: Scalar, tol=None) -> Report:
    """N_{lam',mu'}(u) = N_{mu,lam}(u)."""
    lhs = nekrasov(conjugate(lam), conjugate(mu), u, q)
    rhs = nekrasov(mu, lam, u, q)
    return _compare("transpose", lhs, rhs, _pp(lam=lam, mu=mu, u=u, q=q), tol)


def check_delta(lam, mu, q: Scalar) -> Report:
    """N_{lam,mu}(1) vanishes exactly when lam != mu."""
    value = nekrasov(lam, mu, q ** 0, q)
    ok = (value == 0) == (tuple(lam) != tuple(mu))
    return Report("delta", _pp(lam=lam, mu=mu, q=q), scalar_mode(value), ok,
                  None if ok else {"value": value})


def rn_index(lam, eta) -> int | None:
    """The n with r_n(lam) = eta, if there is one."""
    for n in range(len(lam) + len(eta) + 2):
        if r_n(lam, n) == tuple(eta):
            return n
    return None


def classify_nonvanishing(lam, eta, q: Scalar) -> tuple[bool, int | None]:
    """Whether N_{eta,lam}(1/q) vanishes, and the n with eta = r_n(lam) if any."""
    is_zero = nekrasov(eta, lam, 1 / q, q) == 0
    return is_zero, rn_index(lam, eta)


def check_nonvanishing(lam, eta, q: Scalar) -> Report:
    is_zero, n = classify_nonvanishing(lam, eta, q)
    ok = is_zero == (n is None)
    return Report("nonvanishing", _pp(lam=lam, eta=eta, q=q), scalar_mode(q), ok,
                  None if ok else {"is_zero": is_zero, "rn_index": n})


def _reduction_sides(which: int, lam, mu, n: int, u, q):
    L, k = len(lam), len(mu)
    N = nekrasov
    one = q ** 0
    eta = r_n(lam, n)
    gam = conjugate(r_n(conjugate(mu), n))
    eta_t = bar(eta) if n <= L - 1 else Partition(tuple(lam) + (1,) * (n - L + 1))
    lam_b = bar(lam)
    mu_row = Partition(mu).part

    def column_ratio(row: int, shift: int):
        # prod_{j <= mu_row} (1 - q^(j-1) u) / (1 - q^(-leg_mu(row, j) + j - 2) u)
        p = one
        for j in range(1, mu_row(row) + 1):
            p *= (1 - q_power(q, j - 1) * u) / (1 - q_power(q, -leg(mu, row, j) + j - 2) * u)
        for i in range(1, row):
            p *= 1 - q_power(q, row - i + arm(mu, i, 1) + shift) * u
        return p

    size = sum
    if which == 1:
        lhs = N(eta, lam, 1 / q, q) / N(eta, eta, one, q)
        rhs = N(eta_t, lam_b, 1 / q, q) / N(eta_t, eta_t, one, q) * (1 - q_power(q, size(eta_t) - size(lam)))
    elif which == 2:
        lhs = N(mu, lam, u, q) / N(mu, eta, q * u, q)
        rhs = N(mu, lam_b, u / q, q) / N(mu, eta_t, u, q) * (1 - u)
    elif which == 3:
        mu_b = bar(mu)
        lhs = N(mu, lam, u, q) / N(mu, eta, q * u, q)
        rhs = (N(mu_b, lam, q * u, q) / N(mu_b, eta, q * q * u, q)
               * (1 - q_power(q, size(eta) - size(lam) + 1 - k) * u) / (1 - q * u))
    elif which == 4:
        lhs = N(mu, lam, u, q)
        rhs = N(mu, lam_b, u / q, q) * column_ratio(L + 1, 0)
    elif which == 5:
        lhs = N(mu, eta, u, q)
        rhs = N(mu, eta_t, u / q, q) * column_ratio(L, 0)
    elif which == 6:
        lhs = N(gam, lam, u, q)
        rhs = (N(gam, lam_b, u / q, q) * (1 - q_power(q, L + size(gam) - size(mu) - 1) * u)
               * column_ratio(L, 0))
    else:
        raise ValueError("which must be in 1..6")
    return lhs, rhs


def check_reduction_identity(which: int, lam, mu, n: int, u: Scalar, q: Scalar, tol=None) -> Report:
    """One of the six reduction identities relating r_n(lam) to bar(lam).

    Raises :class:`ResonanceError` when the sample point hits a zero
    denominator; sweeps resample the point instead of skipping.
    """
    if not lam:
        raise ValueError("lambda must be non-empty")
    try:
        lhs, rhs = _reduction_sides(which, lam, mu, n, u, q)
    except ZeroDivisionError as exc:
        raise ResonanceError(f"sample point degenerate for identity {which}") from exc
    return _compare(f"reduction_{which}", lhs, rhs, _pp(lam=lam, mu=mu, n=n, u=u, q=q), tol)


# ---------------------------------------------------------------------------
# exhaustive sweeps

DEFAULT_POINTS = ((Fraction(2, 7), Fraction(3, 5)), (Fraction(3, 11), Fraction(5, 13)))


def _resampled(fn, point, seed_key):
    """Run ``fn(q, u)``; on a degenerate hit draw replacement rationals deterministically."""
    q, u = point
    rng = random.Random(repr(seed_key))
    for _ in range(20):
        try:
            report = fn(q, u)
        except ResonanceError:
            q = Fraction(rng.randint(2, 9), rng.randint(11, 29))
            u = Fraction(rng.randint(1, 19), rng.randint(2, 23))
            continue
        if (q, u) != point:
            report.params["resampled_from"] = [str(point[0]), str(point[1])]
        return report
    raise ResonanceError(f"no non-degenerate sample found for {seed_key}")


def partition_identity_suite(weight_cap: int = 5, n_max: int = 6, points=DEFAULT_POINTS,
                   pair_weight_cap: int | None = None, which=(1, 2, 3, 4, 5, 6)) -> list[Report]:
    """Exact sweep over every partition identity; one merged report per identity.

    Pair-level identities (rule1, transpose, delta, nonvanishing) run up to
    ``pair_weight_cap`` (default ``weight_cap + 2``) because they are cheap.
    """
    pair_cap = weight_cap + 2 if pair_weight_cap is None else pair_weight_cap
    small = enumerate_upto(weight_cap)
    wide = enumerate_upto(pair_cap)
    out = []
    meta = {"weight_cap": weight_cap, "pair_weight_cap": pair_cap, "n_max": n_max,
            "points": [[str(q), str(u)] for q, u in points]}

    def run(name, items):
        out.append(merge(name, items, meta))

    run("transpose", [check_transpose(a, b, u, q) for q, u in points for a in wide for b in wide])
    run("rule1", [check_rule1(a, b, u, q) for q, u in points for a in wide for b in wide])
    run("rule2", [check_rule2(a, q) for q, _ in points for a in wide])
    run("delta", [check_delta(a, b, q) for q, _ in points for a in wide for b in wide])
    run("nonvanishing", [check_nonvanishing(a, e, q) for q, _ in points for a in wide for e in wide])
    for w in which:
        items = []
        for point in points:
            for lam in small:
                if not lam:
                    continue
                for mu in small:
                    for n in range(n_max + 1):
                        items.append(_resampled(
                            lambda q, u: check_reduction_identity(w, lam, mu, n, u, q),
                            point, (w, lam, mu, n, point)))
        run(f"reduction_{w}", items)
    return out
