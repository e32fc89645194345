"""The q-Painleve VI map, its tau-function solution and the bilinear relations.

Time shifts: "up" means t -> q t and "down" means t -> t/q.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .errors import SingularityError
from .qspecial import QContext, gamma_q, q_power
from .report import Report
from .tau import TauFamily, ThetaParams, bilinear_base, tau_family, tau_formula_family

HALF = mp.mpf(1) / 2

LITERAL = "literal"
SHIFTED = "shifted"


@dataclass(frozen=True)
class QPviParams:
    a1: object
    a2: object
    a3: object
    a4: object
    b1: object
    b2: object
    b3: object
    b4: object


def params_from_thetas(theta0, theta_t, theta1, theta_inf, q) -> QPviParams:
    qp = lambda u: q_power(q, u)
    return QPviParams(
        a1=qp(-2 * theta1 - 1), a2=qp(-2 * theta_t - 2 * theta1 - 1), a3=qp(-1), a4=qp(-2 * theta1 - 1),
        b1=qp(-theta0 - theta_t - theta1), b2=qp(theta0 - theta_t - theta1),
        b3=qp(theta_inf - 1), b4=qp(-theta_inf),
    )


@dataclass(frozen=True)
class State:
    y: object
    z: object
    t: object


def _nonzero(value, what: str):
    if value == 0:
        raise SingularityError(f"qPVI map is singular: {what} vanishes")
    return value


def _z_bar(y, z, t, p: QPviParams):
    den = _nonzero(z, "z") * _nonzero(y - p.a3, "y - a3") * _nonzero(y - p.a4, "y - a4")
    return p.b3 * p.b4 * (y - t * p.a1) * (y - t * p.a2) / den


def _y_bar(y, zb, t, p: QPviParams):
    den = _nonzero(y, "y") * _nonzero(zb - p.b3, "zbar - b3") * _nonzero(zb - p.b4, "zbar - b4")
    return p.a3 * p.a4 * (zb - t * p.b1) * (zb - t * p.b2) / den


def qpvi_step(state: State, p: QPviParams, q) -> State:
    """Advance z first (it needs y at time t), then y."""
    zb = _z_bar(state.y, state.z, state.t, p)
    return State(_y_bar(state.y, zb, state.t, p), zb, q * state.t)


def qpvi_step_inverse(state: State, p: QPviParams, q) -> State:
    t = state.t / q
    yb, zb = state.y, state.z
    # the y-equation is symmetric in (y, ybar), the z-equation in (z, zbar)
    y = _y_bar(yb, zb, t, p)
    z = _z_bar(y, zb, t, p)
    return State(y, z, t)


def qpvi_residual(y, z, y_up, z_up, t, p: QPviParams, q, convention: str = LITERAL):
    """Relative residuals (r1, r2) of the y- and z-equations.

    With ``convention="shifted"`` the b1, b2 terms of the y-equation pair
    with q t instead of t.
    """
    tb = q * t if convention == SHIFTED else t
    lhs1 = y * y_up / (p.a3 * p.a4)
    rhs1 = (z_up - tb * p.b1) * (z_up - tb * p.b2) / ((z_up - p.b3) * (z_up - p.b4))
    lhs2 = z * z_up / (p.b3 * p.b4)
    rhs2 = (y - t * p.a1) * (y - t * p.a2) / ((y - p.a3) * (y - p.a4))
    rel = lambda a, b: abs(a - b) / max(abs(a), abs(b))
    return rel(lhs1, rhs1), rel(lhs2, rhs2)


# ---------------------------------------------------------------------------
# tau-function formulas


def _nonzero_tau(value, what):
    if value == 0:
        raise SingularityError(f"{what} vanishes")
    return value


def y_from_tau(fam: TauFamily, t, ctx: QContext):
    """y = q^(-2 theta1 - 1) t tau3 tau4 / (tau1 tau2); same form in both families."""
    with ctx.precision():
        t1, t2, t3, t4 = (fam.value(i, t, ctx) for i in (1, 2, 3, 4))
        return q_power(ctx.q, -2 * fam.base.theta1 - 1) * t * t3 * t4 / _nonzero_tau(t1 * t2, "tau1 tau2")


def z_from_tau_formula(fam: TauFamily, t, ctx: QContext):
    q = ctx.q
    with ctx.precision():
        td = t / q
        u1, u2 = fam.value(1, td, ctx), fam.value(2, td, ctx)
        p1, p2 = fam.value(1, t, ctx), fam.value(2, t, ctx)
        th = fam.base.theta_inf
        den = q_power(q, th) * u1 * p2 - q_power(q, 1 - th) * p1 * u2
        return (u1 * p2 - p1 * u2) / _nonzero_tau(den, "z denominator")


def z_from_tau_bilinear(fam: TauFamily, t, ctx: QContext):
    q = ctx.q
    with ctx.precision():
        td = t / q
        b = fam.base
        num = fam.value(7, td, ctx) * fam.value(8, t, ctx)
        den = _nonzero_tau(fam.value(5, td, ctx) * fam.value(6, t, ctx), "tau5 tau6")
        return -q_power(q, b.theta_t - b.theta1 - 1) * t * num / den


def w_from_tau(fam: TauFamily, t, ctx: QContext):
    q = ctx.q
    with ctx.precision():
        th = fam.base.theta_inf
        pre = q_power(q, -1) * (1 - q_power(q, 1 - 2 * th))
        if pre == 0:
            return pre
        ratio = fam.value(2, t, ctx) / _nonzero_tau(fam.value(1, t, ctx), "tau1")
        return pre * gamma_q(2 * th, ctx) / gamma_q(2 - 2 * th, ctx) * ratio


def state_from_tau(base: ThetaParams, t, ctx: QContext) -> State:
    """(y, z) at time t from the four-member family of ``base``."""
    fam = tau_formula_family(base)
    return State(y_from_tau(fam, t, ctx), z_from_tau_formula(fam, t, ctx), t)


BILINEAR_NAMES = tuple(f"bilinear_{i}" for i in range(1, 9)) + ("tau_wronskian",)


def bilinear_terms(fam: TauFamily, t, ctx: QContext) -> dict:
    """The signed terms of each relation; every relation reads sum(terms) = 0."""
    q = ctx.q
    b = fam.base
    th0, tht, th1, thi = b.theta0, b.theta_t, b.theta1, b.theta_inf
    qq = lambda u: q_power(q, u)
    with ctx.precision():
        P = {i: fam.value(i, t, ctx) for i in range(1, 9)}
        U = {i: fam.value(i, t / q, ctx) for i in range(1, 9)}
        O = {i: fam.value(i, q * t, ctx) for i in (6, 8)}
        return {
            "bilinear_1": [P[1] * P[2], -qq(-2 * th1) * t * P[3] * P[4], -(1 - qq(-2 * th1) * t) * P[5] * P[6]],
            "bilinear_2": [P[1] * P[2], -t * P[3] * P[4], -(1 - qq(-2 * tht) * t) * U[5] * O[6]],
            "bilinear_3": [P[1] * P[2], -P[3] * P[4], (1 - qq(-2 * th1) * t) * qq(2 * tht) * U[7] * O[8]],
            "bilinear_4": [P[1] * P[2], -qq(2 * tht) * P[3] * P[4],
                           (1 - qq(-2 * tht) * t) * qq(2 * tht) * P[7] * P[8]],
            "bilinear_5": [U[5] * P[6], qq(-th1 - thi + tht - HALF) * t * U[7] * P[8], -U[1] * P[2]],
            "bilinear_6": [U[5] * P[6], qq(-th1 + thi + tht - HALF) * t * U[7] * P[8], -P[1] * U[2]],
            "bilinear_7": [U[5] * P[6], qq(th0 + 2 * tht) * U[7] * P[8], -qq(tht) * U[3] * P[4]],
            "bilinear_8": [U[5] * P[6], qq(-th0 + 2 * tht) * U[7] * P[8], -qq(tht) * P[3] * U[4]],
            "tau_wronskian": _wronskian_terms(P, U, t, b, q),
        }


def _wronskian_terms(P, U, t, b, q):
    qq = lambda u: q_power(q, u)
    k = ((qq(HALF + b.theta_inf) - qq(HALF - b.theta_inf)) / (qq(-b.theta0) - qq(b.theta0))
         * qq(-b.theta1 - 1) * t)
    return [U[1] * P[2], -P[1] * U[2], -k * U[3] * P[4], k * P[3] * U[4]]


def bilinear_residuals(fam: TauFamily, t, ctx: QContext) -> dict:
    """|sum of terms| over the largest term, per relation."""
    if fam.kind != "bilinear":
        raise ValueError("bilinear relations need the eight-member family")
    with ctx.precision():
        out = {}
        for name, terms in bilinear_terms(fam, t, ctx).items():
            out[name] = abs(mp.fsum(terms)) / max(abs(x) for x in terms)
        return out


def _meta(ctx: QContext, **extra) -> dict:
    return {**ctx.metadata(), **extra}


def bilinear_report(base: ThetaParams, t, ctx: QContext, tol=mp.mpf("1e-8")) -> list[Report]:
    """Reports for the eight relations and the tau Wronskian identity; ``base`` uses the four-member convention."""
    fam = tau_family(bilinear_base(base))
    res = bilinear_residuals(fam, t, ctx)
    converged = all(v.converged for tt in (t, t / ctx.q, ctx.q * t) for v in fam.details(tt, ctx))
    params = _meta(ctx, t=t, base=base)
    return [Report(name, params, "float", bool(r <= tol), {"residual": r, "converged": converged})
            for name, r in res.items()]


def z_crosscheck(base: ThetaParams, t, ctx: QContext):
    a = z_from_tau_formula(tau_formula_family(base), t, ctx)
    b = z_from_tau_bilinear(tau_family(bilinear_base(base)), t, ctx)
    return a, b, abs(a - b) / max(abs(a), abs(b))


def qpvi_report(base: ThetaParams, t, ctx: QContext, steps: int = 3, tol=mp.mpf("1e-8"),
                probe: bool = False) -> list[Report]:
    """qPVI residuals along t, qt, ..., plus the two z formulas compared."""
    q = ctx.q
    p = params_from_thetas(base.theta0, base.theta_t, base.theta1, base.theta_inf, q)
    out = []
    with ctx.precision():
        states = [state_from_tau(base, t * q ** k, ctx) for k in range(steps + 1)]
        for k in range(steps):
            s0, s1 = states[k], states[k + 1]
            r1, r2 = qpvi_residual(s0.y, s0.z, s1.y, s1.z, s0.t, p, q)
            witness = {"r1": r1, "r2": r2, "residual": max(r1, r2)}
            if probe:
                a1, a2 = qpvi_residual(s0.y, s0.z, s1.y, s1.z, s0.t, p, q, SHIFTED)
                witness["shifted_convention"] = {"r1": a1, "r2": a2}
            out.append(Report("qpvi_step", _meta(ctx, t=s0.t, base=base), "float",
                              bool(max(r1, r2) <= tol), witness))
        for k in range(steps):
            _, _, r = z_crosscheck(base, t * q ** k, ctx)
            out.append(Report("z_formulas", _meta(ctx, t=t * q ** k, base=base), "float",
                              bool(r <= tol), {"residual": r}))
    return out


def trace(base: ThetaParams, t, ctx: QContext, steps: int) -> list[dict]:
    """Orbit from the map iterated on the tau seed, next to the tau values themselves."""
    q = ctx.q
    p = params_from_thetas(base.theta0, base.theta_t, base.theta1, base.theta_inf, q)
    rows = []
    with ctx.precision():
        direct = state_from_tau(base, t, ctx)
        for k in range(steps + 1):
            exact = state_from_tau(base, t * q ** k, ctx)
            dev = max(abs(direct.y - exact.y) / abs(exact.y), abs(direct.z - exact.z) / abs(exact.z))
            rows.append({"step": k, "t": exact.t, "y_map": direct.y, "z_map": direct.z,
                         "y_tau": exact.y, "z_tau": exact.z, "deviation": dev})
            if k < steps:
                direct = qpvi_step(direct, p, q)
    return rows
