"""Tau functions as Fourier sums of structure constants times instanton series.

tau(t) = sum_{n=-N}^{N} s^n t^((sigma+n)^2 - theta_t^2 - theta_0^2) C[sigma+n] Z[sigma+n, t]

The instanton series Z is the two-insertion block sum with inserted weights
(theta_t, theta_1) between theta_0 and theta_inf, so it shares the block
engine and its coefficient cache.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp

from .blocks import SIGNS, block_coefficients, distance_to_integers
from .errors import PoleError, ResonanceError
from .qspecial import QContext, barnes_g_q, require_float

HALF = mp.mpf(1) / 2
RESONANCE_GUARD = mp.mpf("0.02")


@dataclass(frozen=True)
class ThetaParams:
    theta0: object
    theta_t: object
    theta1: object
    theta_inf: object
    sigma: object
    s: object

    @classmethod
    def parse(cls, ctx: QContext, **values) -> "ThetaParams":
        return cls(**{k: ctx.scalar(v) for k, v in values.items()})

    def shifted(self, **deltas) -> "ThetaParams":
        """Add offsets; binary floats are added exactly so the ambient precision cannot round them."""
        def add(a, b):
            if isinstance(a, mp.mpf):
                return mp.fadd(a, b, exact=True)
            return a + b

        return dataclasses.replace(self, **{k: add(getattr(self, k), v) for k, v in deltas.items()})

    def to_json_data(self) -> dict:
        from .report import jsonable

        return {f.name: jsonable(getattr(self, f.name)) for f in dataclasses.fields(self)}


def resonance_distance(p: ThetaParams, ctx: QContext) -> mp.mpf:
    """How far 2(sigma+n) stays from the integers; n-independent, so one number covers the window."""
    return distance_to_integers(2 * p.sigma)


def check_resonance(p: ThetaParams, ctx: QContext, guard=RESONANCE_GUARD) -> None:
    if resonance_distance(p, ctx) < guard:
        raise ResonanceError(f"2*sigma={mp.nstr(2 * p.sigma, 10)} lies within {guard} of an integer")


def c_structure(theta1, theta_t, theta_inf, theta0, sigma, ctx: QContext):
    """prod_{e,e'} G_q(1+e th_inf-th1+e' sigma) G_q(1+e sigma-th_t+e' th0) / (G_q(1+2 sigma) G_q(1-2 sigma))."""
    require_float(theta1, theta_t, theta_inf, theta0, sigma, ctx.q)
    with ctx.precision():
        den = mp.mpf(1)
        for arg in (1 + 2 * sigma, 1 - 2 * sigma):
            g = barnes_g_q(arg, ctx)
            if g == 0:
                raise PoleError(f"structure constant has a pole: G_q({mp.nstr(arg, 10)}) = 0")
            den *= g
        num = mp.mpf(1)
        for e in SIGNS:
            for ep in SIGNS:
                num *= barnes_g_q(1 + e * theta_inf - theta1 + ep * sigma, ctx)
                num *= barnes_g_q(1 + e * sigma - theta_t + ep * theta0, ctx)
        return num / den


def z_coefficients(theta1, theta_t, theta_inf, theta0, sigma, ctx: QContext, K: int | None = None) -> list:
    """Coefficients of t^0..t^K in the instanton series."""
    K = ctx.weight_cap if K is None else K
    coeffs = block_coefficients((theta_t, theta1), (theta0, sigma, theta_inf), ctx, K)
    out = [mp.mpf(0)] * (K + 1)
    for (w,), c in coeffs.items():
        out[w] = c
    return out


def z_instanton(theta1, theta_t, theta_inf, theta0, sigma, t, ctx: QContext, K: int | None = None):
    require_float(t, ctx.q)
    with ctx.precision():
        return mp.polyval(z_coefficients(theta1, theta_t, theta_inf, theta0, sigma, ctx, K)[::-1], t)


INSTANTON_TAIL_LIMIT = mp.mpf("1e-6")


@dataclass(frozen=True)
class TauValue:
    """A tau value with two truncation diagnostics, both relative to |value|.

    ``boundary`` is the larger of the n = +-N Fourier terms; ``instanton_tail``
    is the largest last-kept t^K contribution over the window.
    """

    value: object
    boundary: mp.mpf
    instanton_tail: mp.mpf
    converged: bool

    def to_json_data(self) -> dict:
        from .report import jsonable

        return {"value": jsonable(self.value), "boundary": jsonable(self.boundary),
                "instanton_tail": jsonable(self.instanton_tail), "converged": self.converged}


def _term(p: ThetaParams, n: int, t, ctx: QContext):
    """(term, magnitude of its last kept t^K contribution)."""
    sn = p.sigma + n
    c = c_structure(p.theta1, p.theta_t, p.theta_inf, p.theta0, sn, ctx)
    if c == 0:
        return c, mp.mpf(0)
    zc = z_coefficients(p.theta1, p.theta_t, p.theta_inf, p.theta0, sn, ctx)
    pre = mp.power(p.s, n) * mp.power(t, sn ** 2 - p.theta_t ** 2 - p.theta0 ** 2) * c
    return pre * mp.polyval(zc[::-1], t), abs(pre * zc[-1] * t ** (len(zc) - 1))


@lru_cache(maxsize=8192)
def _tau_cached(p: ThetaParams, t, ctx: QContext) -> TauValue:
    check_resonance(p, ctx)
    N = ctx.fourier_window
    with ctx.precision():
        # with s = 0 only n = 0 survives; negative powers are dropped by convention
        window = [0] if p.s == 0 else range(-N, N + 1)
        terms = {n: _term(p, n, t, ctx) for n in window}
        value = mp.fsum(terms[n][0] for n in window)
        scale = abs(value) if value != 0 else mp.mpf(0)
        if not scale:
            return TauValue(value, mp.inf, mp.inf, False)
        edge = max(abs(terms[-N][0]), abs(terms[N][0])) if N and p.s != 0 else mp.mpf(0)
        tail = max(terms[n][1] for n in window) / scale
        boundary = edge / scale
        return TauValue(value, boundary, tail,
                        bool(boundary <= mp.eps ** HALF and tail <= INSTANTON_TAIL_LIMIT))


def tau_eval_detailed(p: ThetaParams, t, ctx: QContext) -> TauValue:
    require_float(t, ctx.q, p.sigma, p.s)
    with ctx.precision():
        return _tau_cached(p, mp.mpmathify(t), ctx)


def tau_eval(p: ThetaParams, t, ctx: QContext):
    return tau_eval_detailed(p, t, ctx).value


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class TauFamily:
    """Shifted parameter sets built from one base; index i holds tau_(i+1)."""

    kind: str
    base: ThetaParams
    members: tuple

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i: int) -> ThetaParams:
        """1-based member access, matching the tau_1, tau_2, ... labels."""
        return self.members[i - 1]

    def values(self, t, ctx: QContext) -> list:
        return [tau_eval(m, t, ctx) for m in self.members]

    def value(self, i: int, t, ctx: QContext):
        return tau_eval(self[i], t, ctx)

    def details(self, t, ctx: QContext) -> list[TauValue]:
        return [tau_eval_detailed(m, t, ctx) for m in self.members]


BILINEAR_SHIFTS = (
    {"theta_inf": HALF},
    {"theta_inf": -HALF},
    {"theta0": HALF, "sigma": HALF},
    {"theta0": -HALF, "sigma": -HALF},
    {"theta1": -HALF},
    {"theta1": HALF},
    {"theta_t": -HALF, "sigma": HALF},
    {"theta_t": HALF, "sigma": -HALF},
)

FORMULA_SHIFTS = (
    {},
    {"theta_inf": -1},
    {"theta_inf": -HALF, "theta0": HALF, "sigma": HALF},
    {"theta_inf": -HALF, "theta0": -HALF, "sigma": -HALF},
)


def tau_family(base: ThetaParams) -> TauFamily:
    """The eight tau functions entering the bilinear relations.

    The base carries the half-shifted theta_inf of that setting; use
    :func:`bilinear_base` to convert from the base of the four-member family.
    """
    return TauFamily("bilinear", base, tuple(base.shifted(**d) for d in BILINEAR_SHIFTS))


def tau_formula_family(base: ThetaParams) -> TauFamily:
    """The four tau functions of the explicit y, z, w formulas."""
    return TauFamily("formula", base, tuple(base.shifted(**d) for d in FORMULA_SHIFTS))


def bilinear_base(formula_base: ThetaParams) -> ThetaParams:
    """theta_inf -> theta_inf - 1/2, so that the eight-member tau_1 equals the four-member tau_1."""
    return formula_base.shifted(theta_inf=-HALF)


def formula_base(bilinear: ThetaParams) -> ThetaParams:
    return bilinear.shifted(theta_inf=HALF)
