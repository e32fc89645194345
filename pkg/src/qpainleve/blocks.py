"""q-conformal blocks, degenerate four-point blocks and the braiding matrix.

A block with m inserted primaries theta_1..theta_m, boundary weights
theta_0 and theta_(m+1), internal weights sigma_1..sigma_(m-1) and points
x_1..x_m is a sum over tuples of partition pairs (one pair per internal
edge).  With sigma_0 = theta_0 and sigma_m = theta_(m+1) the summand is a
product of "link" factors between neighbouring edges and a "self" factor
per edge, times the monomial prod_p (q^(2 theta_p) x_p / x_(p+1))^|L_p|.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable

import mpmath as mp

from .errors import DomainError, PoleError, ResonanceError, SingularityError
from .nekrasov import nekrasov_power
from .partitions import EMPTY, Partition, PartitionPair, arm, bar, enumerate_upto, leg, pairs_upto
from .qspecial import (QContext, barnes_g_q, gamma_q, heine_F, nearest_integer, q_power,
                       require_float, theta)
from .report import Report, merge

SIGNS = (1, -1)
HALF = mp.mpf(1) / 2


# ---------------------------------------------------------------------------
# 2x2 matrices indexed by signs


@dataclass(frozen=True)
class Matrix2:
    """2x2 matrix with rows/columns labelled (+, -), stored row-major."""

    pp: object
    pm: object
    mp_: object
    mm: object

    @classmethod
    def from_function(cls, f: Callable[[int, int], object]) -> "Matrix2":
        return cls(f(1, 1), f(1, -1), f(-1, 1), f(-1, -1))

    @classmethod
    def identity(cls) -> "Matrix2":
        return cls(mp.mpf(1), mp.mpf(0), mp.mpf(0), mp.mpf(1))

    @classmethod
    def swap(cls, s) -> "Matrix2":
        """[[0, s], [1, 0]]."""
        return cls(mp.mpf(0), s, mp.mpf(1), mp.mpf(0))

    def __getitem__(self, key):
        e, ep = key
        return (self.pp if ep > 0 else self.pm) if e > 0 else (self.mp_ if ep > 0 else self.mm)

    def entries(self) -> tuple:
        return (self.pp, self.pm, self.mp_, self.mm)

    def __matmul__(self, other: "Matrix2") -> "Matrix2":
        a, b, c, d = self.entries()
        e, f, g, h = other.entries()
        return Matrix2(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def __add__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(*(x + y for x, y in zip(self.entries(), other.entries())))

    def __sub__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(*(x - y for x, y in zip(self.entries(), other.entries())))

    def scale(self, c) -> "Matrix2":
        return Matrix2(*(c * x for x in self.entries()))

    def det(self):
        return self.pp * self.mm - self.pm * self.mp_

    def norm(self):
        return max(abs(x) for x in self.entries())

    def inverse(self, threshold=mp.mpf("1e-12")) -> "Matrix2":
        """Adjugate inverse; refuses when |det| is tiny relative to the entries squared."""
        d = self.det()
        if abs(d) <= threshold * self.norm() ** 2:
            raise SingularityError("matrix is numerically singular")
        return Matrix2(self.mm / d, -self.pm / d, -self.mp_ / d, self.pp / d)

    def to_json_data(self):
        from .report import jsonable

        return [[jsonable(self.pp), jsonable(self.pm)], [jsonable(self.mp_), jsonable(self.mm)]]


def relative_difference(a, b) -> mp.mpf:
    """max-entry |a - b| over the larger of the two magnitudes (scalars or Matrix2)."""
    if isinstance(a, Matrix2):
        scale = max(a.norm(), b.norm())
        diff = (a - b).norm()
    else:
        scale = max(abs(a), abs(b))
        diff = abs(a - b)
    return diff / scale if scale else mp.mpf(0)


def distance_to_integers(z) -> mp.mpf:
    z = mp.mpmathify(z)
    if isinstance(z, mp.mpc):
        return abs(z - mp.nint(z.real))
    return abs(z - mp.nint(z))


# ---------------------------------------------------------------------------
# normalisation


def normalization_N(theta3, theta2, theta1, ctx: QContext, regularize: bool = False):
    """prod_{e,e'} G_q(1 + e theta3 - theta2 - e' theta1) / (G_q(1+2 theta3) G_q(1-2 theta1)).

    With ``regularize`` the single vanishing numerator factor is divided
    out, which is the value of the epsilon-regularised normalisation at a
    degenerate insertion.
    """
    require_float(theta3, theta2, theta1, ctx.q)
    with ctx.precision():
        for arg in (1 + 2 * theta3, 1 - 2 * theta1):
            if barnes_g_q(arg, ctx) == 0:
                raise PoleError(f"normalisation denominator G_q({mp.nstr(arg, 8)}) vanishes")
        num = mp.mpf(1)
        dropped = 0
        for e in SIGNS:
            for ep in SIGNS:
                arg = 1 + e * theta3 - theta2 - ep * theta1
                g = barnes_g_q(arg, ctx)
                if regularize and g == 0 and nearest_integer(arg, ctx.zero_tol) == 0:
                    dropped += 1
                    continue
                num *= g
        if regularize and dropped != 1:
            raise ResonanceError("regularised normalisation needs exactly one G_q(0) factor")
        return num / (barnes_g_q(1 + 2 * theta3, ctx) * barnes_g_q(1 - 2 * theta1, ctx))


def normalization_N_degenerate(theta3, theta2, theta1, ctx: QContext):
    return normalization_N(theta3, theta2, theta1, ctx, regularize=True)


def is_degenerate_slot(theta_p, sigma_p, sigma_prev, ctx: QContext) -> bool:
    """Insertion of weight 1/2 between weights differing by 1/2."""
    tol = ctx.zero_tol
    return (abs(theta_p - HALF) <= tol
            and nearest_integer(2 * (sigma_p - sigma_prev), tol) in (1, -1))


# ---------------------------------------------------------------------------
# the multi-partition sum


@dataclass(frozen=True)
class BlockSpec:
    """Inserted weights theta_1..theta_m, internal sigma_1..sigma_(m-1), points x_1..x_m."""

    thetas: tuple
    sigmas: tuple
    theta0: object
    theta_top: object
    xs: tuple
    ctx: QContext
    regularize: bool = True

    def __post_init__(self):
        m = len(self.thetas)
        if m < 1 or len(self.sigmas) != m - 1 or len(self.xs) != m:
            raise ValueError("need m thetas, m-1 sigmas and m points")

    @property
    def m(self) -> int:
        return len(self.thetas)

    @property
    def full_sigmas(self) -> tuple:
        return (self.theta0,) + tuple(self.sigmas) + (self.theta_top,)


class _LevelData:
    """Cached link and self factors for one edge of a block."""

    def __init__(self, thetas, sig, p, ctx):
        self.q, self.tol = ctx.q, ctx.zero_tol
        th = thetas[p - 1]
        self.link_args = {(e, ep): e * sig[p] - th - ep * sig[p - 1] for e in SIGNS for ep in SIGNS}
        self.self_arg = 2 * sig[p] if p < len(thetas) else None

    def link(self, cur: PartitionPair, prev: PartitionPair):
        f = mp.mpf(1)
        for (e, ep), u in self.link_args.items():
            f *= nekrasov_power(cur.by_sign(e), prev.by_sign(ep), u, self.q, self.tol)
            if f == 0:
                return f
        return f

    def self_factor(self, cur: PartitionPair):
        u = self.self_arg
        a, b = cur.plus, cur.minus
        d = (nekrasov_power(a, a, 0, self.q, self.tol) * nekrasov_power(b, b, 0, self.q, self.tol)
             * nekrasov_power(a, b, u, self.q, self.tol) * nekrasov_power(b, a, -u, self.q, self.tol))
        if d == 0:
            raise ResonanceError(f"internal weight 2*sigma={mp.nstr(u, 8)} is resonant")
        return d


_COEFF_CACHE: dict = {}
_EMPTY_PAIR = PartitionPair(EMPTY, EMPTY)


def block_coefficients(thetas, full_sigmas, ctx: QContext, K: int | None = None,
                       fixed: dict | None = None) -> dict:
    """Map each weight tuple (|L_1|, ..., |L_(m-1)|) to its summed coefficient.

    ``fixed`` pins chosen edges (1-based) to a given pair; the rest run over
    all pairs with total weight at most K.
    """
    K = ctx.weight_cap if K is None else K
    thetas, sig = tuple(thetas), tuple(full_sigmas)
    m = len(thetas)
    fixed = fixed or {}
    key = (thetas, sig, ctx.q, K, ctx.mantissa_bits, ctx.product_cutoff,
           tuple(sorted((k, tuple(v)) for k, v in fixed.items())))
    hit = _COEFF_CACHE.get(key)
    if hit is not None:
        return hit
    with ctx.precision():
        levels = [None] + [_LevelData(thetas, sig, p, ctx) for p in range(1, m + 1)]
        candidates = {p: ((PartitionPair(*fixed[p]),) if p in fixed else pairs_upto(K))
                      for p in range(1, m)}
        out: dict = {}

        def walk(p, prev, weights, budget, acc):
            if p == m:
                f = acc * levels[m].link(_EMPTY_PAIR, prev)
                if f != 0:
                    out[weights] = out.get(weights, 0) + f
                return
            lvl = levels[p]
            for cur in candidates[p]:
                w = cur.weight
                if w > budget:
                    if p in fixed:
                        return
                    break
                f = lvl.link(cur, prev)
                if f == 0:
                    continue
                walk(p + 1, cur, weights + (w,), budget - w, acc * f / lvl.self_factor(cur))

        walk(1, _EMPTY_PAIR, (), K, mp.mpf(1))
        result = {k: +v for k, v in sorted(out.items())}
    _COEFF_CACHE[key] = result
    return result


def block_prefactor(spec: BlockSpec):
    """prod_p N(sigma_p; theta_p, sigma_(p-1)) q^(2 theta_p sigma_p^2) x_p^(sigma_p^2 - theta_p^2 - sigma_(p-1)^2)."""
    ctx = spec.ctx
    sig = spec.full_sigmas
    q = ctx.q
    with ctx.precision():
        pre = mp.mpf(1)
        for p in range(1, spec.m + 1):
            th = spec.thetas[p - 1]
            degenerate = spec.regularize and is_degenerate_slot(th, sig[p], sig[p - 1], ctx)
            pre *= normalization_N(sig[p], th, sig[p - 1], ctx, regularize=degenerate)
            pre *= q_power(q, 2 * th * sig[p] ** 2)
            pre *= mp.power(spec.xs[p - 1], sig[p] ** 2 - th ** 2 - sig[p - 1] ** 2)
        return pre


def expansion_variables(spec: BlockSpec) -> list:
    q = spec.ctx.q
    return [q_power(q, 2 * spec.thetas[p - 1]) * spec.xs[p - 1] / spec.xs[p] for p in range(1, spec.m)]


def evaluate_series(coeffs: dict, zs) -> object:
    total = mp.mpf(0)
    for weights, c in coeffs.items():
        term = c
        for z, w in zip(zs, weights):
            if w:
                term *= z ** w
        total += term
    return total


def conformal_block(spec: BlockSpec, K: int | None = None):
    """Prefactor times the truncated partition sum."""
    require_float(spec.ctx.q, *spec.thetas, *spec.sigmas, spec.theta0, spec.theta_top, *spec.xs)
    with spec.ctx.precision():
        coeffs = block_coefficients(spec.thetas, spec.full_sigmas, spec.ctx, K)
        return block_prefactor(spec) * evaluate_series(coeffs, expansion_variables(spec))


# ---------------------------------------------------------------------------
# degenerate four-point blocks


def _degenerate_common(th_inf, th1, th0, x1, x2, ctx):
    q = ctx.q
    num = mp.mpf(1)
    for a in SIGNS:
        for b in SIGNS:
            num *= barnes_g_q(HALF + a * th_inf - th1 + b * th0, ctx)
    num /= barnes_g_q(1 + 2 * th_inf, ctx) * barnes_g_q(1 - 2 * th0, ctx)
    return (q_power(q, 2 * th1 * th_inf ** 2) * mp.power(x1, -mp.mpf(1) / 4)
            * mp.power(x2, th_inf ** 2 - th1 ** 2 - th0 ** 2) * num)


def degenerate_block_4pt(side: str, sign: int, th_inf, th1, th0, x1, x2, ctx: QContext,
                         order: int | None = None):
    """Closed form of a four-point block with one weight-1/2 insertion.

    ``side="left"``: the degenerate field sits next to theta_inf with
    internal weight theta_inf + sign/2; ``side="right"``: it sits next to
    theta_0 with internal weight theta_0 + sign/2.
    """
    require_float(th_inf, th1, th0, x1, x2, ctx.q)
    q = ctx.q
    with ctx.precision():
        pre = _degenerate_common(th_inf, th1, th0, x1, x2, ctx)
        if side == "left":
            r = q_power(q, 2 * th1) * x2 / x1
            if abs(r) >= 1:
                raise DomainError("need |q^(2 theta1) x2/x1| < 1")
            a = HALF + sign * th_inf - th1
            return (pre * q_power(q, th_inf ** 2) * mp.power(r, sign * th_inf + mp.mpf(1) / 4)
                    * heine_F(a + th0, a - th0, 1 + 2 * sign * th_inf, r, ctx, order))
        if side == "right":
            r = q * x1 / x2
            if abs(r) >= 1:
                raise DomainError("need |q x1/x2| < 1")
            return (pre * q_power(q, th0 ** 2) * mp.power(r, sign * th0 + mp.mpf(1) / 4)
                    * heine_F(HALF + th_inf - th1 + sign * th0, HALF - th_inf - th1 + sign * th0,
                              1 + 2 * sign * th0, r, ctx, order))
        raise ValueError("side must be 'left' or 'right'")


def degenerate_block_spec(side: str, sign: int, th_inf, th1, th0, x1, x2, ctx: QContext) -> BlockSpec:
    """The m=2 block that the closed form above sums."""
    if side == "left":
        return BlockSpec((th1, HALF), (th_inf + sign * HALF,), th0, th_inf, (x2, x1), ctx)
    return BlockSpec((HALF, th1), (th0 + sign * HALF,), th0, th_inf, (x1, x2), ctx)


# ---------------------------------------------------------------------------
# braiding matrix


def log_ratio(x, ctx: QContext):
    """u with x = q^u on the principal branch."""
    return mp.log(x) / mp.log(ctx.q)


def braiding_matrix(th1, th_inf, th0, x, ctx: QContext, u=None) -> Matrix2:
    """B_{e,e'} = -e th(1/2+e'th_inf+th1-e th0)/th(2th0) * th(1/2+e'th_inf+th1+e th0+u)/th(2th1+u).

    Pass ``u`` directly to pin the branch of log x / log q.
    """
    with ctx.precision():
        if u is None:
            require_float(x, ctx.q)
            u = log_ratio(x, ctx)
        d0 = theta(2 * th0, ctx)
        d1 = theta(2 * th1 + u, ctx)
        if d0 == 0 or d1 == 0:
            raise ResonanceError("braiding matrix denominator vanishes")

        def entry(e, ep):
            a = HALF + ep * th_inf + th1
            return -e * theta(a - e * th0, ctx) / d0 * theta(a + e * th0 + u, ctx) / d1

        return Matrix2.from_function(entry)


def braiding_det_formula(th1, th_inf, th0, u, ctx: QContext):
    return theta(2 * th_inf, ctx) / theta(2 * th0, ctx) * theta(u, ctx) / theta(u + 2 * th1, ctx)


def braiding_properties(th1, th_inf, th0, u, ctx: QContext) -> dict:
    """Residuals of q-periodicity, inversion, determinant and unit periodicity."""
    with ctx.precision():
        B = braiding_matrix(th1, th_inf, th0, None, ctx, u=u)
        out = {
            "q_periodic": relative_difference(B, braiding_matrix(th1, th_inf, th0, None, ctx, u=u + 1)),
            "inverse": relative_difference(
                B @ braiding_matrix(th1, th0, th_inf, None, ctx, u=-2 * th1 - u), Matrix2.identity()),
            "determinant": relative_difference(B.det(), braiding_det_formula(th1, th_inf, th0, u, ctx)),
        }
        shifted = [braiding_matrix(th1, th_inf, th0 + 1, None, ctx, u=u),
                   braiding_matrix(th1 + 1, th_inf, th0, None, ctx, u=u),
                   braiding_matrix(th1, th_inf + 1, th0, None, ctx, u=u)]
        out["unit_periodic"] = max(relative_difference(B, S) for S in shifted)
        return out


def _generic_braiding_point(rng: random.Random, guard: float):
    while True:
        th1, th_inf, th0 = (mp.mpf(rng.uniform(-0.9, 0.9)) for _ in range(3))
        u = mp.mpc(rng.uniform(-1.5, 1.5), rng.uniform(-0.6, 0.6))
        watched = [2 * th0, 2 * th_inf, 2 * th1 + u, u]
        watched += [HALF + a * th_inf + th1 + b * th0 for a in SIGNS for b in SIGNS]
        if min(distance_to_integers(z) for z in watched) >= guard:
            return th1, th_inf, th0, u


def braiding_suite(ctx: QContext, points: int = 50, seed: int = 20240607,
                   tol=mp.mpf("1e-20"), guard: float = 0.05) -> list[Report]:
    """Braiding-matrix properties at seeded random generic points."""
    rng = random.Random(seed)
    per: dict = {}
    with ctx.precision():
        for _ in range(points):
            th1, th_inf, th0, u = _generic_braiding_point(rng, guard)
            params = {"theta1": th1, "theta_inf": th_inf, "theta0": th0, "u": u}
            for name, res in braiding_properties(th1, th_inf, th0, u, ctx).items():
                per.setdefault(name, []).append(
                    Report(f"braid_{name}", params, "float", bool(res <= tol), {"residual": res}))
    meta = {"points": points, "seed": seed, "tol": tol, **ctx.metadata()}
    return [merge(f"braid_{name}", reps, meta) for name, reps in per.items()]


# ---------------------------------------------------------------------------
# matrix elements of the braiding relation


def _nq(lam, mu, u, ctx):
    return nekrasov_power(tuple(lam), tuple(mu), u, ctx.q, ctx.zero_tol)


def _x_plus(lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, k_eta):
    q = ctx.q
    pre = (_nq(alpha, beta, 2 * th_inf, ctx) * _nq(beta, lam, -th_inf - HALF - th1 - sigma, ctx)
           * _nq(beta, mu, -th_inf - HALF - th1 + sigma, ctx))
    if pre == 0:
        return pre
    r = q_power(q, 2 * th1) * x2 / x1
    mono = (1 / x2) ** (sum(lam) + sum(mu)) * (q * x1) ** (sum(alpha) + sum(beta)) * r ** sum(beta)
    total = mp.mpf(0)
    for eta in enumerate_upto(k_eta):
        num = _nq(alpha, eta, -1, ctx)
        if num == 0:
            continue
        den = _nq(eta, beta, 2 * th_inf + 1, ctx) * _nq(eta, eta, 0, ctx)
        if den == 0:
            raise ResonanceError("2*theta_inf+1 is resonant in the X series")
        num *= _nq(eta, lam, th_inf + HALF - th1 - sigma, ctx) * _nq(eta, mu, th_inf + HALF - th1 + sigma, ctx)
        total += r ** sum(eta) * num / den
    return pre * mono * total


def _y_plus(lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, k_eta):
    q = ctx.q
    pre = (_nq(lam, mu, 2 * sigma, ctx) * _nq(alpha, lam, th_inf - th1 - sigma - HALF, ctx)
           * _nq(beta, lam, -th_inf - th1 - sigma - HALF, ctx))
    if pre == 0:
        return pre
    r = q * x1 / x2
    mono = (1 / x1) ** (sum(lam) + sum(mu)) * (q_power(q, 2 * th1) * x2) ** (sum(alpha) + sum(beta)) * r ** sum(lam)
    total = mp.mpf(0)
    for eta in enumerate_upto(k_eta):
        num = _nq(eta, mu, -1, ctx)
        if num == 0:
            continue
        den = _nq(lam, eta, 2 * sigma + 1, ctx) * _nq(eta, eta, 0, ctx)
        if den == 0:
            raise ResonanceError("2*sigma+1 is resonant in the Y series")
        num *= _nq(alpha, eta, th_inf - th1 + sigma + HALF, ctx) * _nq(beta, eta, -th_inf - th1 + sigma + HALF, ctx)
        total += r ** sum(eta) * num / den
    return pre * mono * total


def x_func(eps_p: int, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx: QContext,
           k_eta: int = 12):
    """Left-hand matrix element; the minus sign swaps alpha, beta and flips theta_inf."""
    with ctx.precision():
        if eps_p > 0:
            return _x_plus(lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, k_eta)
        return _x_plus(lam, mu, beta, alpha, -th_inf, th1, sigma, x1, x2, ctx, k_eta)


def y_func(eps: int, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx: QContext,
           k_eta: int = 12):
    """Right-hand matrix element; the minus sign swaps lambda, mu and flips sigma."""
    with ctx.precision():
        if eps > 0:
            return _y_plus(lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, k_eta)
        return _y_plus(mu, lam, alpha, beta, th_inf, th1, -sigma, x1, x2, ctx, k_eta)


def braiding_identity_sides(eps_p: int, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2,
                            ctx: QContext, k_eta: int = 12):
    """Both sides of the general-partition braiding relation for one column eps_p."""
    q = ctx.q
    with ctx.precision():
        g = lambda u: gamma_q(u, ctx)
        r_x = q_power(q, 2 * th1) * x2 / x1
        lhs = (q_power(q, th_inf ** 2) * mp.power(r_x, eps_p * th_inf + mp.mpf(1) / 4)
               * g(HALF + eps_p * th_inf - th1 + sigma) * g(HALF + eps_p * th_inf - th1 - sigma)
               / g(1 + 2 * eps_p * th_inf)
               * x_func(eps_p, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, k_eta))
        B = braiding_matrix(th1, th_inf, sigma, x2 / x1, ctx)
        tail = q_power(q, th1 ** 2 - th1 / 2) * mp.power(x2 / x1, th1)
        r_y = q * x1 / x2
        rhs = mp.mpf(0)
        for e in SIGNS:
            rhs += (q_power(q, sigma ** 2) * mp.power(r_y, e * sigma + mp.mpf(1) / 4)
                    * g(HALF + th_inf - th1 + e * sigma) * g(HALF - th_inf - th1 + e * sigma)
                    / g(1 + 2 * e * sigma)
                    * y_func(e, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, k_eta)
                    * B[e, eps_p])
        return lhs, rhs * tail


def braiding_identity_residual(lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx: QContext,
                               k_eta: int = 12, eps_primes: Iterable[int] = SIGNS):
    """Largest relative residual over the requested columns."""
    worst = mp.mpf(0)
    with ctx.precision():
        for ep in eps_primes:
            lhs, rhs = braiding_identity_sides(ep, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, k_eta)
            if lhs == 0 and rhs == 0:
                continue
            worst = max(worst, relative_difference(lhs, rhs))
    return worst


def braiding_resonance_distance(th_inf, th1, sigma) -> mp.mpf:
    """Distance of every Gamma/Nekrasov argument of the relation from the integers."""
    watched = [2 * th_inf, 2 * sigma, 2 * th1]
    watched += [HALF + a * th_inf - th1 + b * sigma for a in SIGNS for b in SIGNS]
    return min(distance_to_integers(z) for z in watched)


def quadruples(max_weight: int) -> list[tuple[Partition, Partition, Partition, Partition]]:
    parts = enumerate_upto(max_weight)
    out = []
    for a in parts:
        for b in parts:
            for c in parts:
                for d in parts:
                    if a.weight + b.weight + c.weight + d.weight <= max_weight:
                        out.append((a, b, c, d))
    out.sort(key=lambda t: sum(p.weight for p in t))
    return out


def reduction_prefactor(lam, alpha, beta, th_inf, th1, sigma, x2, ctx: QContext):
    """The C factor relating a lambda matrix element to its first-column-removed partner."""
    q = ctx.q
    L = len(lam)
    c = mp.mpf(1)
    for part, th in ((alpha, th_inf), (beta, -th_inf)):
        row = part[L - 1] if L <= len(part) else 0
        for j in range(1, row + 1):
            c *= ((1 - q_power(q, j + th - th1 - sigma - HALF))
                  / (1 - q_power(q, -leg(part, L, j) + j + th - th1 - sigma - 3 * HALF)))
        for i in range(1, L):
            c *= 1 - q_power(q, L - i + arm(part, i, 1) + th - th1 - sigma + HALF)
    return c * q ** (L - sum(alpha) - sum(beta)) * x2 ** (-L)


def braiding_reduction_residuals(lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx: QContext,
                                k_eta: int = 12) -> dict:
    """Residuals of the three first-column reduction identities.

    Keys ending in ``_literal`` use the naive coefficients (X^+ on the right
    of the X identity, x2/x1 in the Y^- identity). The unsuffixed keys use
    X^eps and x2/(q x1), the forms that actually hold.
    """
    if not lam:
        raise ValueError("lambda must be non-empty")
    q = ctx.q
    out = {}
    with ctx.precision():
        L = len(lam)
        lb = bar(lam)
        C = reduction_prefactor(lam, alpha, beta, th_inf, th1, sigma, x2, ctx)
        t1, sg = th1 + HALF, sigma + HALF
        for e in SIGNS:
            lhs = x_func(e, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, k_eta)
            for label, sign in (("", e), ("_literal", 1)):
                f = lambda xx: x_func(sign, lb, mu, alpha, beta, th_inf, t1, sg, xx, x2, ctx, k_eta)
                rhs = (C * (1 - q_power(q, -e * th_inf - th1 - sigma - HALF))
                       * q_power(q, e * th_inf - th1 - sigma - HALF)
                       * (q_power(q, -L - e * th_inf + th1 + sigma + HALF) * f(q * x1) - f(x1)))
                out[f"X{'+' if e > 0 else '-'}{label}"] = relative_difference(lhs, rhs)
        f = lambda xx: y_func(1, lb, mu, alpha, beta, th_inf, t1, sg, xx, x2, ctx, k_eta)
        lhs = y_func(1, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, k_eta)
        rhs = (C * (1 - q_power(q, th_inf - th1 - sigma - HALF)) * (1 - q_power(q, -th_inf - th1 - sigma - HALF))
               / (1 - q_power(q, 2 * sigma + 1)) * (f(x1) - q_power(q, -L + 1 + 2 * sigma) * f(q * x1)))
        out["Y+"] = relative_difference(lhs, rhs)
        f = lambda xx: y_func(-1, lb, mu, alpha, beta, th_inf, t1, sg, xx, x2, ctx, k_eta)
        lhs = y_func(-1, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, k_eta)
        core = C * (1 - q_power(q, -2 * sigma)) * x2 / x1 * (f(x1) - q_power(q, -L) * f(q * x1))
        out["Y-"] = relative_difference(lhs, core / q)
        out["Y-_literal"] = relative_difference(lhs, core)
    return out


def check_braiding_reduction(lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx: QContext,
                             k_eta: int = 12, tol=mp.mpf("1e-12")) -> Report:
    res = braiding_reduction_residuals(lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, k_eta)
    decisive = max(res[k] for k in ("X+", "X-", "Y+", "Y-"))
    params = {"lam": lam, "mu": mu, "alpha": alpha, "beta": beta, "theta_inf": th_inf,
              "theta1": th1, "sigma": sigma, "x1": x1, "x2": x2, "k_eta": k_eta}
    return Report("braiding_reduction", params, "float", bool(decisive <= tol),
                  {"residual": decisive, "components": dict(sorted(res.items()))})


# ---------------------------------------------------------------------------
# six-point extraction


def six_point_element(eps_p: int, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx: QContext,
                      K: int = 12, spectators=None):
    """Matrix element read off from a six-point block with outer edges pinned.

    The block has insertions (theta_t, theta1, 1/2, theta2) over boundary
    weights (theta0, theta3) and internal weights (sigma, theta_inf + eps_p/2,
    theta_inf).  Edge 1 is pinned to (lam, mu) and edge 3 to (alpha, beta);
    the sum over edge 2 is divided by the factors that only involve the pinned
    edges and their outer neighbours, and multiplied by the monomials that the
    matrix element carries.  ``spectators`` = (theta_t, theta0, theta2, theta3)
    are arbitrary and must drop out.
    """
    th_t, th0, th2, th3 = spectators or (mp.mpf("0.137"), mp.mpf("0.291"), mp.mpf("0.173"), mp.mpf("0.419"))
    q = ctx.q
    thetas = (th_t, th1, HALF, th2)
    sig = (th0, sigma, th_inf + eps_p * HALF, th_inf, th3)
    L1, L3 = PartitionPair(Partition(lam), Partition(mu)), PartitionPair(Partition(alpha), Partition(beta))
    with ctx.precision():
        # edge 2 is (eta, beta) or (alpha, eta); let eta run to exactly K
        budget = L1.weight + L3.weight + K + L3.by_sign(-eps_p).weight
        coeffs = block_coefficients(thetas, sig, ctx, budget, fixed={1: L1, 3: L3})
        z2 = q_power(q, 2 * th1) * x2 / x1
        middle = sum((c * z2 ** w[1] for w, c in coeffs.items()), mp.mpf(0))
        levels = [None] + [_LevelData(thetas, sig, p, ctx) for p in range(1, 5)]
        outer = (levels[1].link(L1, _EMPTY_PAIR) / levels[1].self_factor(L1)
                 * levels[4].link(_EMPTY_PAIR, L3) / levels[3].self_factor(L3))
        mono = (1 / x2) ** L1.weight * (q * x1) ** L3.weight
        return middle / outer * mono


def check_six_point_extraction(eps_p, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx: QContext,
                               K: int = 12, tol=mp.mpf("1e-20")) -> Report:
    with ctx.precision():
        a = six_point_element(eps_p, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, K)
        b = x_func(eps_p, lam, mu, alpha, beta, th_inf, th1, sigma, x1, x2, ctx, K)
        res = relative_difference(a, b)
    params = {"eps_p": eps_p, "lam": lam, "mu": mu, "alpha": alpha, "beta": beta}
    return Report("six_point_extraction", params, "float", bool(res <= tol), {"residual": res})


def vacuum_heine_residual(eps_p: int, th_inf, th1, sigma, x1, x2, ctx: QContext, k_eta: int = 12):
    """The all-empty matrix element against the 2phi1 series it sums to."""
    from .qspecial import heine_phi

    q = ctx.q
    with ctx.precision():
        th = eps_p * th_inf
        r = q_power(q, 2 * th1) * x2 / x1
        series = heine_phi(q_power(q, HALF + th - th1 - sigma), q_power(q, HALF + th - th1 + sigma),
                           q_power(q, 1 + 2 * th), r, q, k_eta)
        return relative_difference(x_func(eps_p, EMPTY, EMPTY, EMPTY, EMPTY, th_inf, th1, sigma, x1, x2, ctx, k_eta),
                                   series)
