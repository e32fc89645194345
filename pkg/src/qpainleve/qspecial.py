"""Scalars, truncation context and the basic q-special functions.

Two arithmetic modes coexist.  Exact scalars are ``int`` or
``fractions.Fraction``; floating scalars are ``mpmath`` numbers.  Python
integers are neutral and combine with either mode, while mixing a Fraction
with an mpmath value raises :class:`ModeError`.

All complex powers use the principal branch, ``q**u = exp(u * Log q)``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import mpmath as mp

from .errors import DomainError, ModeError, PoleError

Scalar = Union[int, Fraction, mp.mpf, mp.mpc]

EXACT = "exact"
FLOAT = "float"


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def scalar_mode(*values) -> str:
    """Common arithmetic mode of ``values``; integers fit either mode."""
    kinds = set()
    for v in values:
        if isinstance(v, bool):
            raise ModeError("booleans are not scalars")
        if isinstance(v, int):
            continue
        if isinstance(v, Fraction):
            kinds.add(EXACT)
        elif isinstance(v, (mp.mpf, mp.mpc, float, complex)):
            kinds.add(FLOAT)
        else:
            raise ModeError(f"unsupported scalar type {type(v).__name__}")
    if len(kinds) > 1:
        raise ModeError("exact and floating scalars mixed in one expression")
    return kinds.pop() if kinds else EXACT


def require_float(*values) -> None:
    if any(isinstance(v, Fraction) for v in values):
        raise ModeError("this routine is only defined in floating mode")
    scalar_mode(*values)


@dataclass(frozen=True)
class QContext:
    """Base q together with precision and truncation orders.

    ``product_cutoff`` (P) bounds infinite products, ``weight_cap`` (K)
    bounds partition sums and ``fourier_window`` (N) bounds the n-sum of
    tau functions.
    """

    q: Scalar
    mantissa_bits: int = 128
    product_cutoff: int = 256
    weight_cap: int = 8
    fourier_window: int = 6

    def __post_init__(self):
        q = self.q
        if isinstance(q, str):
            q = self._parse(q, exact="/" in q and "." not in q)
            object.__setattr__(self, "q", q)
        if self.mantissa_bits < 16:
            raise ValueError("mantissa_bits must be at least 16")
        if min(self.product_cutoff, self.weight_cap, self.fourier_window) < 0:
            raise ValueError("truncation orders must be non-negative")
        if q == 0 or abs(q) >= 1:
            raise DomainError("need 0 < |q| < 1")

    def _parse(self, text: str, exact: bool):
        if exact:
            return Fraction(text)
        with mp.workprec(self.mantissa_bits):
            return mp.mpmathify(text)

    @property
    def exact(self) -> bool:
        return is_exact(self.q)

    @property
    def mode(self) -> str:
        return EXACT if self.exact else FLOAT

    def precision(self):
        """Context manager running mpmath at this context's mantissa width."""
        return mp.workprec(self.mantissa_bits)

    def replace(self, **changes) -> "QContext":
        return dataclasses.replace(self, **changes)

    def scalar(self, value) -> Scalar:
        """Convert a string or number to this context's arithmetic mode."""
        if self.exact:
            if isinstance(value, (mp.mpf, mp.mpc, float, complex)):
                raise ModeError("floating value given to an exact context")
            return Fraction(value)
        if isinstance(value, Fraction):
            raise ModeError("exact value given to a floating context")
        with self.precision():
            return mp.mpmathify(value)

    @property
    def zero_tol(self):
        """Threshold below which a floating exponent is treated as an exact integer hit."""
        return mp.mpf(2) ** (-(self.mantissa_bits * 3 // 4))

    def metadata(self) -> dict:
        return {"q": self.q, "bits": self.mantissa_bits, "P": self.product_cutoff,
                "K": self.weight_cap, "N": self.fourier_window}


@dataclass(frozen=True)
class Truncated:
    """A truncated infinite product with its tail bound."""

    value: Scalar
    tail: mp.mpf
    converged: bool


@lru_cache(maxsize=4096)
def _log_q(q, prec: int):
    return mp.log(q)


def q_power(q: Scalar, u: Scalar) -> Scalar:
    """Principal ``q**u``; exact for rational q and integer u."""
    if is_exact(q) and is_exact(u):
        u = Fraction(u)
        if u.denominator != 1:
            raise ModeError("non-integer power of an exact base")
        return Fraction(q) ** int(u)
    if u == 0:
        return mp.mpf(1)
    return mp.exp(u * _log_q(q, mp.mp.prec))


def nearest_integer(u: Scalar, tol) -> int | None:
    """The integer within ``tol`` of ``u``, if any; exact values need an exact hit."""
    if is_exact(u):
        u = Fraction(u)
        return int(u) if u.denominator == 1 else None
    if isinstance(u, mp.mpc):
        if abs(u.imag) > tol:
            return None
        u = u.real
    n = int(mp.nint(u))
    return n if abs(u - n) <= tol else None


def q_number(u: Scalar, q: Scalar) -> Scalar:
    """The q-number [u] = (1 - q^u)/(1 - q)."""
    return (1 - q_power(q, u)) / (1 - q)


def q_pochhammer_finite(a: Scalar, q: Scalar, n: int) -> Scalar:
    """(a; q)_n, exact whenever a and q are."""
    if n < 0:
        raise ValueError("n must be non-negative")
    scalar_mode(a, q)
    result = Fraction(1) if is_exact(a) and is_exact(q) else mp.mpf(1)
    power = a
    for _ in range(n):
        result *= 1 - power
        power *= q
    return result


def _tail_single(a, q, P):
    aq = abs(q)
    return abs(a) * aq ** P / (1 - aq)


def _tail_double(a, q, P):
    aq = abs(q)
    return abs(a) * (P + 1) * aq ** P / (1 - aq) ** 2


@lru_cache(maxsize=65536)
def _qpoch_inf(a, q, P: int, prec: int):
    result = mp.mpf(1)
    power = a
    for _ in range(P):
        result *= 1 - power
        power *= q
    return result


@lru_cache(maxsize=65536)
def _qqpoch_inf(a, q, P: int, prec: int):
    result = mp.mpf(1)
    power = a
    for m in range(P):
        result *= (1 - power) ** (m + 1)
        power *= q
    return result


def _finish(value, tail, with_tail):
    if not with_tail:
        return value
    scale = max(abs(value), mp.mpf(1))
    return Truncated(value, tail, bool(tail <= scale * mp.eps * 4))


def q_pochhammer_inf(a: Scalar, ctx: QContext, with_tail: bool = False):
    """(a; q)_inf truncated after P factors."""
    require_float(a, ctx.q)
    with ctx.precision():
        a = mp.mpmathify(a)
        value = +_qpoch_inf(a, ctx.q, ctx.product_cutoff, mp.mp.prec)
        return _finish(value, _tail_single(a, ctx.q, ctx.product_cutoff), with_tail)


def q_double_pochhammer_inf(a: Scalar, ctx: QContext, with_tail: bool = False):
    """(a; q, q)_inf = prod_{m<P} (1 - a q^m)^(m+1)."""
    require_float(a, ctx.q)
    with ctx.precision():
        a = mp.mpmathify(a)
        value = +_qqpoch_inf(a, ctx.q, ctx.product_cutoff, mp.mp.prec)
        return _finish(value, _tail_double(a, ctx.q, ctx.product_cutoff), with_tail)


@lru_cache(maxsize=65536)
def _gamma_q(u, q, P: int, prec: int, tol):
    n = nearest_integer(u, tol)
    if n is not None and n <= 0:
        raise PoleError(f"Gamma_q has a pole at u={n}")
    num = _qpoch_inf(q, q, P, prec)
    den = _qpoch_inf(q_power(q, u), q, P, prec)
    return num / den * mp.exp((1 - u) * mp.log(1 - q))


def gamma_q(u: Scalar, ctx: QContext) -> Scalar:
    """Gamma_q(u) = (q;q)_inf / (q^u;q)_inf * (1-q)^(1-u)."""
    require_float(u, ctx.q)
    with ctx.precision():
        return +_gamma_q(mp.mpmathify(u), ctx.q, ctx.product_cutoff, mp.mp.prec, ctx.zero_tol)


@lru_cache(maxsize=65536)
def _barnes_g_q(u, q, P: int, prec: int, tol):
    n = nearest_integer(u, tol)
    if n is not None and n <= 0:
        return mp.mpf(0)
    value = _qqpoch_inf(q_power(q, u), q, P, prec) / _qqpoch_inf(q, q, P, prec)
    value *= mp.exp((u - 1) * mp.log(_qpoch_inf(q, q, P, prec)))
    value *= mp.exp(-(u - 1) * (u - 2) / 2 * mp.log(1 - q))
    return value


def barnes_g_q(u: Scalar, ctx: QContext) -> Scalar:
    """q-Barnes function; vanishes at the non-positive integers."""
    require_float(u, ctx.q)
    with ctx.precision():
        return +_barnes_g_q(mp.mpmathify(u), ctx.q, ctx.product_cutoff, mp.mp.prec, ctx.zero_tol)


def big_theta(x: Scalar, ctx: QContext) -> Scalar:
    """Theta_q(x) = (x, q/x, q; q)_inf."""
    require_float(x, ctx.q)
    if x == 0:
        raise DomainError("Theta_q is undefined at x=0")
    with ctx.precision():
        x = mp.mpmathify(x)
        q, P = ctx.q, ctx.product_cutoff
        return _qpoch_inf(x, q, P, mp.mp.prec) * _qpoch_inf(q / x, q, P, mp.mp.prec) * _qpoch_inf(q, q, P, mp.mp.prec)


def theta(u: Scalar, ctx: QContext) -> Scalar:
    """theta(u) = q^(u(u-1)/2) Theta_q(q^u); zero exactly at the integers."""
    require_float(u, ctx.q)
    with ctx.precision():
        u = mp.mpmathify(u)
        n = nearest_integer(u, ctx.zero_tol)
        if n is not None:
            return mp.mpf(0)
        return q_power(ctx.q, u * (u - 1) / 2) * big_theta(q_power(ctx.q, u), ctx)


def heine_phi(a: Scalar, b: Scalar, c: Scalar, x: Scalar, q: Scalar, order: int) -> Scalar:
    """2phi1(a, b; c; q, x) summed through x**order."""
    mode = scalar_mode(a, b, c, x, q)
    term = Fraction(1) if mode == EXACT else mp.mpf(1)
    total = term
    qn = q ** 0
    for n in range(order):
        den = (1 - c * qn) * (1 - q * qn)
        if den == 0:
            raise PoleError(f"2phi1 denominator vanishes at n={n}")
        term = term * (1 - a * qn) * (1 - b * qn) / den * x
        total += term
        qn *= q
    return total


def heine_F(alpha: Scalar, beta: Scalar, gamma: Scalar, x: Scalar, ctx: QContext,
            order: int | None = None) -> Scalar:
    """Gamma_q(a)Gamma_q(b)/Gamma_q(c) * 2phi1(q^a, q^b; q^c; q, x).

    The series is summed through ``x**order`` (default: the context's weight
    cap), the same order a block sum of that weight cap carries.
    """
    require_float(alpha, beta, gamma, x, ctx.q)
    if abs(x) >= 1:
        raise DomainError("Heine series needs |x| < 1")
    order = ctx.weight_cap if order is None else order
    with ctx.precision():
        n = nearest_integer(gamma, ctx.zero_tol)
        if n is not None and n <= 0:
            raise PoleError(f"gamma={n} is a non-positive integer")
        q = ctx.q
        pre = gamma_q(alpha, ctx) * gamma_q(beta, ctx) / gamma_q(gamma, ctx)
        return pre * heine_phi(q_power(q, alpha), q_power(q, beta), q_power(q, gamma), x, q, order)
