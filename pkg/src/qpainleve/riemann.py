"""Matrix solutions of the linear q-difference system built from five-point blocks.

Three 2x2 solutions live on overlapping regions of the x-plane:
Y^inf for R1 < |x|, Y^0t on the annulus R1 < |x| < R2 and Y^0 for |x| < R2.
Each entry is a Fourier sum over n of blocks with one degenerate insertion,
divided by a constant built from the two-insertion sum.

The coefficient matrices A(x, t) and B(x, t) are rational in x.  They are
recovered from values on a circle by a discrete Fourier transform of the
polynomial numerators, which exposes both the rational structure and the
coefficients (A2, B0, and the y, z, w data).
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .blocks import (HALF, SIGNS, BlockSpec, Matrix2, block_coefficients, block_prefactor,
                     braiding_matrix, evaluate_series, expansion_variables,
                     normalization_N_degenerate, relative_difference)
from .errors import DomainError
from .qpvi import params_from_thetas, w_from_tau, y_from_tau, z_from_tau_formula
from .qspecial import QContext, q_pochhammer_inf, q_power, require_float
from .tau import ThetaParams, check_resonance, tau_formula_family

WHICH = ("inf", "0t", "0")
SAMPLE_POINTS = 8


@dataclass(frozen=True)
class RiemannDomain:
    R1: object
    R2: object

    @property
    def mid_radius(self):
        return mp.sqrt(self.R1 * self.R2)

    def contains(self, which: str, x) -> bool:
        r = abs(x)
        if which == "inf":
            return r > self.R1
        if which == "0t":
            return self.R1 < r < self.R2
        return r < self.R2


def _corner_values(p: ThetaParams, t, q):
    return [mp.mpf(1), q_power(q, -2 * p.theta1), t * q_power(q, -2 * p.theta1),
            t * q_power(q, -2 * p.theta1 - 2 * p.theta_t)]


def riemann_domain(p: ThetaParams, t, ctx: QContext, require_annulus: bool = True) -> RiemannDomain:
    """Region radii; only the middle solution needs R1 < R2."""
    with ctx.precision():
        vals = [abs(v) for v in _corner_values(p, t, ctx.q)]
        dom = RiemannDomain(max(vals), min(vals) / abs(ctx.q))
    if require_annulus and not dom.R1 < dom.R2:
        raise DomainError(f"empty annulus: R1={mp.nstr(dom.R1, 6)} >= R2={mp.nstr(dom.R2, 6)}")
    return dom


def _block_layout(which: str, e: int, ep: int, n: int, p: ThetaParams):
    """(thetas, full sigmas, degenerate slot) of one Fourier term."""
    th0, tht, th1, thi, sn = p.theta0, p.theta_t, p.theta1, p.theta_inf, p.sigma + n
    if which == "inf":
        return (tht, th1, HALF), (th0, sn, thi - (e - ep) * HALF, thi - e * HALF)
    if which == "0t":
        return (tht, HALF, th1), (th0, sn, sn + ep * HALF, thi - e * HALF)
    if which == "0":
        return (HALF, tht, th1), (th0, th0 + ep * HALF, sn + HALF, thi - e * HALF)
    if which == "hat":
        return (tht, th1), (th0, sn, thi)
    raise ValueError(f"unknown solution {which!r}")


def _points(which: str, x, t, p: ThetaParams, q):
    qt = q_power(q, 2 * p.theta_t)
    if which == "hat":
        return (t, qt)
    X = q_power(q, 2 * p.theta_t + 2 * p.theta1) * x
    return {"inf": (t, qt, X), "0t": (t, X, qt), "0": (X, t, qt)}[which]


def _fourier_term(which, e, ep, n, x, t, p, ctx):
    thetas, sig = _block_layout(which, e, ep, n, p)
    spec = BlockSpec(thetas, sig[1:-1], sig[0], sig[-1], _points(which, x, t, p, ctx.q), ctx)
    coeffs = block_coefficients(thetas, sig, ctx)
    return block_prefactor(spec) * evaluate_series(coeffs, expansion_variables(spec))


def tau_hat(p: ThetaParams, t, ctx: QContext):
    """Fourier sum of normalised two-insertion blocks."""
    N = ctx.fourier_window
    with ctx.precision():
        return mp.fsum(mp.power(p.s, n) * _fourier_term("hat", 0, 0, n, None, t, p, ctx)
                       for n in range(-N, N + 1))


def k_factors(e: int, p: ThetaParams, t, ctx: QContext):
    """(k_inf, k_0t, k_0) for row e."""
    q = ctx.q
    with ctx.precision():
        thi, th1, tht = p.theta_inf, p.theta1, p.theta_t
        k_inf = (q_power(q, (thi - e * HALF) ** 2 - 2 * e * thi * (tht + th1))
                 * normalization_N_degenerate(thi - e * HALF, HALF, thi, ctx) * tau_hat(p, t, ctx))
        k_0t = k_inf * q_power(q, th1 ** 2 + th1 / 2)
        k_0 = k_0t * q_power(q, tht ** 2 + tht / 2 + 2 * th1 * tht) * mp.power(t, -tht)
        return k_inf, k_0t, k_0


def y_matrix(which: str, x, t, p: ThetaParams, ctx: QContext, enforce_region: bool = True) -> Matrix2:
    """Assembled Y^which(x, t); refuses points outside its region."""
    require_float(x, t, ctx.q)
    if which not in WHICH:
        raise ValueError(f"unknown solution {which!r}")
    check_resonance(p, ctx)
    if enforce_region and not riemann_domain(p, t, ctx, which == "0t").contains(which, x):
        raise DomainError(f"x={mp.nstr(x, 6)} is outside the region of Y^{which}")
    N = ctx.fourier_window
    with ctx.precision():
        rows = {}
        for e in SIGNS:
            k = k_factors(e, p, t, ctx)[WHICH.index(which)]
            for ep in SIGNS:
                total = mp.fsum(mp.power(p.s, n) * _fourier_term(which, e, ep, n, x, t, p, ctx)
                                for n in range(-N, N + 1))
                rows[e, ep] = total / k
        pre = {"inf": mp.mpf(1), "0t": mp.power(x, -p.theta1),
               "0": mp.power(x, -p.theta_t - p.theta1)}[which]
        return Matrix2.from_function(lambda e, ep: pre * rows[e, ep])


def connection_matrices(x, t, p: ThetaParams, ctx: QContext) -> tuple[Matrix2, Matrix2]:
    q = ctx.q
    with ctx.precision():
        lx, lq = mp.log(x), mp.log(q)
        u1 = -2 * p.theta1 - lx / lq
        b1 = braiding_matrix(p.theta1, p.theta_inf + HALF, p.sigma, None, ctx, u=u1)
        u2 = -2 * p.theta_t - 2 * p.theta1 + mp.log(t) / lq - lx / lq
        b2 = braiding_matrix(p.theta_t, p.sigma + HALF, p.theta0, None, ctx, u=u2) @ Matrix2.swap(p.s)
        return b1, b2


def connection_residual(pair: str, x, t, p: ThetaParams, ctx: QContext):
    """Y^inf = Y^0t B1 for pair "inf-0t"; Y^0t = Y^0 B2 for pair "0t-0"."""
    b1, b2 = connection_matrices(x, t, p, ctx)
    with ctx.precision():
        if pair == "inf-0t":
            return relative_difference(y_matrix("inf", x, t, p, ctx), y_matrix("0t", x, t, p, ctx) @ b1)
        if pair == "0t-0":
            return relative_difference(y_matrix("0t", x, t, p, ctx), y_matrix("0", x, t, p, ctx) @ b2)
    raise ValueError("pair must be 'inf-0t' or '0t-0'")


def det_yinf_formula(x, t, p: ThetaParams, ctx: QContext):
    q = ctx.q
    qp = lambda a: q_pochhammer_inf(a, ctx)
    a = q_power(q, -2 * p.theta1)
    b = t * q_power(q, -2 * p.theta_t - 2 * p.theta1)
    return qp(a / x) * qp(b / x) / (qp(1 / x) * qp(t * a / x))


def det_yinf_check(x, t, p: ThetaParams, ctx: QContext):
    with ctx.precision():
        return relative_difference(y_matrix("inf", x, t, p, ctx).det(), det_yinf_formula(x, t, p, ctx))


# ---------------------------------------------------------------------------
# rational reconstruction


def circle_points(radius, count: int = SAMPLE_POINTS) -> list:
    """Equally spaced points offset by half a step, so none lies on the real axis."""
    return [radius * mp.expj((k + HALF) * 2 * mp.pi / count) for k in range(count)]


def fourier_modes(values: list, points: list) -> list:
    """Coefficients c_j with sum_j c_j x^j matching values; index j runs over 0..count-1."""
    n = len(points)
    r = abs(points[0])
    return [mp.fsum(v * mp.expj(-j * mp.arg(x)) for v, x in zip(values, points)) / n / r ** j
            for j in range(n)]


@dataclass(frozen=True)
class MatrixPolynomial:
    """Entry-wise polynomial coefficients plus the size of the modes that should vanish."""

    coeffs: tuple  # Matrix2 per power of x
    leak: mp.mpf   # largest forbidden mode relative to the largest allowed one

    def __call__(self, x) -> Matrix2:
        total = Matrix2(*(mp.mpf(0),) * 4)
        for j, c in enumerate(self.coeffs):
            total = total + c.scale(x ** j)
        return total


def fit_polynomial(values: list[Matrix2], points: list, degree: int) -> MatrixPolynomial:
    """Fourier-fit matrix values assumed polynomial of the given degree."""
    radius = abs(points[0])
    per_entry = [fourier_modes([v.entries()[i] for v in values], points) for i in range(4)]
    coeffs = tuple(Matrix2(*(per_entry[i][j] for i in range(4))) for j in range(degree + 1))
    allowed = max(max(abs(per_entry[i][j]) * radius ** j for i in range(4)) for j in range(degree + 1))
    forbidden = max(abs(per_entry[i][j]) * radius ** j for i in range(4)
                    for j in range(degree + 1, len(points)))
    return MatrixPolynomial(coeffs, forbidden / allowed)


def a_poles(t, p: ThetaParams, q):
    return q_power(q, -1), t * q_power(q, -2 * p.theta1 - 1)


def a_det_formula(x, t, p: ThetaParams, q):
    n1, n2 = q_power(q, -2 * p.theta1 - 1), t * q_power(q, -2 * p.theta_t - 2 * p.theta1 - 1)
    d1, d2 = a_poles(t, p, q)
    return (x - n1) * (x - n2) / ((x - d1) * (x - d2))


def a2_matrix(p: ThetaParams, q) -> Matrix2:
    return Matrix2(q_power(q, -p.theta_inf), mp.mpf(0), mp.mpf(0), q_power(q, p.theta_inf))


def b_pole(t, p: ThetaParams, q):
    return t * q_power(q, -2 * p.theta_t - 2 * p.theta1)


@dataclass(frozen=True)
class RationalA:
    """A(x, t) = P(x) / ((x - q^-1)(x - t q^(-2 theta1 - 1))) with P quadratic."""

    numerator: MatrixPolynomial
    poles: tuple

    def __call__(self, x) -> Matrix2:
        d1, d2 = self.poles
        return self.numerator(x).scale(1 / ((x - d1) * (x - d2)))


@dataclass(frozen=True)
class RationalB:
    """B(x, t) = (x I + B0) / (x - t q^(-2 theta_t - 2 theta1))."""

    numerator: MatrixPolynomial
    pole: object

    @property
    def B0(self) -> Matrix2:
        return self.numerator.coeffs[0]

    def __call__(self, x) -> Matrix2:
        return self.numerator(x).scale(1 / (x - self.pole))


@dataclass
class RiemannData:
    """Everything measured on the sample circle at one (params, t)."""

    params: ThetaParams
    t: object
    domain: RiemannDomain
    points: list
    a_values: list
    a_rational: RationalA
    b_rational: RationalB


def a_from_y0(x, t, p: ThetaParams, ctx: QContext) -> Matrix2:
    """A(x) = Y^0(qx) Y^0(x)^-1, valid wherever |x| < R2."""
    with ctx.precision():
        return y_matrix("0", ctx.q * x, t, p, ctx) @ y_matrix("0", x, t, p, ctx).inverse()


def a_from_yinf(x, t, p: ThetaParams, ctx: QContext) -> Matrix2:
    """A(x) = Y^inf(qx) Y^inf(x)^-1, valid wherever |q x| > R1."""
    with ctx.precision():
        return y_matrix("inf", ctx.q * x, t, p, ctx) @ y_matrix("inf", x, t, p, ctx).inverse()


def b_from_yinf(x, t, p: ThetaParams, ctx: QContext) -> Matrix2:
    """B(x, t) = Y^inf(x, qt) Y^inf(x, t)^-1."""
    with ctx.precision():
        return y_matrix("inf", x, ctx.q * t, p, ctx) @ y_matrix("inf", x, t, p, ctx).inverse()


def reconstruct(p: ThetaParams, t, ctx: QContext, count: int = SAMPLE_POINTS) -> RiemannData:
    q = ctx.q
    dom = riemann_domain(p, t, ctx)
    with ctx.precision():
        pts = circle_points(dom.mid_radius, count)
        a_vals = [a_from_y0(x, t, p, ctx) for x in pts]
        d1, d2 = a_poles(t, p, q)
        a_num = fit_polynomial([a.scale((x - d1) * (x - d2)) for a, x in zip(a_vals, pts)], pts, 2)
        c = b_pole(t, p, q)
        b_num = fit_polynomial([b_from_yinf(x, t, p, ctx).scale(x - c) for x in pts], pts, 1)
        return RiemannData(p, t, dom, pts, a_vals, RationalA(a_num, (d1, d2)), RationalB(b_num, c))


def y_from_A(data: RiemannData, ctx: QContext) -> dict:
    """y, z, w read off the rational A."""
    q, p, t = ctx.q, data.params, data.t
    with ctx.precision():
        c0 = data.a_rational.numerator.coeffs[0][1, -1]
        c1 = data.a_rational.numerator.coeffs[1][1, -1]
        c2 = data.a_rational.numerator.coeffs[2][1, -1]
        y = -c0 / c1
        w = c1 * q_power(q, -p.theta_inf)
        a_pp = data.a_rational(y)[1, 1]
        z = (y - t * q_power(q, -2 * p.theta_t - 2 * p.theta1 - 1)) / (q * a_pp * (y - q_power(q, -1)))
        return {"y": y, "z": z, "w": w, "quadratic_offdiag": abs(c2) / abs(c1)}


def compatibility_a_next(data: RiemannData, x, ctx: QContext) -> Matrix2:
    """A(x, qt) predicted from A(., t) and B(., t): B(qx) A(x) B(x)^-1."""
    with ctx.precision():
        return data.b_rational(ctx.q * x) @ data.a_rational(x) @ data.b_rational(x).inverse()


def z_reference(p: ThetaParams, t, ctx: QContext):
    """z(t) from y(t) and z(qt) through the z-equation of the map.

    The direct tau formula needs tau at t/q, which for small q lies far
    outside the range where the t-series converges.
    """
    q = ctx.q
    fam = tau_formula_family(p)
    with ctx.precision():
        pp = params_from_thetas(p.theta0, p.theta_t, p.theta1, p.theta_inf, q)
        y = y_from_tau(fam, t, ctx)
        z_up = z_from_tau_formula(fam, q * t, ctx)
        return pp.b3 * pp.b4 * (y - t * pp.a1) * (y - t * pp.a2) / ((y - pp.a3) * (y - pp.a4) * z_up)


def structure_residuals(p: ThetaParams, t, ctx: QContext, count: int = SAMPLE_POINTS) -> dict:
    """All Riemann-problem residuals on the mid-annulus circle."""
    q = ctx.q
    data = reconstruct(p, t, ctx, count)
    pts = data.points
    out: dict = {}
    with ctx.precision():
        out["connection_inf_0t"] = max(connection_residual("inf-0t", x, t, p, ctx) for x in pts)
        out["connection_0t_0"] = max(connection_residual("0t-0", x, t, p, ctx) for x in pts)
        out["det_yinf"] = max(det_yinf_check(x, t, p, ctx) for x in pts)
        out["det_a"] = max(relative_difference(a.det(), a_det_formula(x, t, p, q))
                           for a, x in zip(data.a_values, pts))
        out["a_rational"] = data.a_rational.numerator.leak
        out["a2_limit"] = relative_difference(data.a_rational.numerator.coeffs[2], a2_matrix(p, q))
        out["b_linear"] = max(data.b_rational.numerator.leak,
                              relative_difference(data.b_rational.numerator.coeffs[1], Matrix2.identity()))

        # A from Y^inf far out, where |q x| clears R1 by a factor 10
        far = circle_points(10 * data.domain.R1 / q, 4)
        out["a_outer_agreement"] = max(relative_difference(a_from_yinf(x, t, p, ctx), data.a_rational(x))
                                       for x in far)

        # A at the next time step, predicted through the compatibility relation
        d1, d2 = a_poles(q * t, p, q)
        nxt = [compatibility_a_next(data, x, ctx) for x in pts]
        fit = fit_polynomial([m.scale((x - d1) * (x - d2)) for m, x in zip(nxt, pts)], pts, 2)
        out["compatibility"] = max(
            fit.leak,
            relative_difference(fit.coeffs[2], a2_matrix(p, q)),
            max(relative_difference(m.det(), a_det_formula(x, q * t, p, q)) for m, x in zip(nxt, pts)),
        )

        # B0(t) against z, w one step later
        fam = tau_formula_family(p)
        z_up, w_up = z_from_tau_formula(fam, q * t, ctx), w_from_tau(fam, q * t, ctx)
        predicted = q_power(q, 1 + p.theta_inf) * z_up * w_up / (1 - q_power(q, 1 - p.theta_inf) * z_up)
        out["b_z"] = relative_difference(data.b_rational.B0[1, -1], predicted)

        linear = y_from_A(data, ctx)
        out["y_from_A"] = relative_difference(linear["y"], y_from_tau(fam, t, ctx))
        out["z_from_A"] = relative_difference(linear["z"], z_reference(p, t, ctx))
        out["w_from_A"] = relative_difference(linear["w"], w_from_tau(fam, t, ctx))
    return out
