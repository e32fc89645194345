"""Integer partitions and the statistics the Nekrasov products need.

Rows beyond the length of a partition are zero, so ``arm`` and ``leg``
accept any cell with positive coordinates and may return negative values.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator, NamedTuple

from .qspecial import Scalar, q_power


class Partition(tuple):
    """Weakly decreasing tuple of positive integers; ``Partition()`` is empty."""

    __slots__ = ()

    def __new__(cls, parts=()):
        parts = tuple(int(p) for p in parts)
        if any(p <= 0 for p in parts):
            raise ValueError(f"parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts must be weakly decreasing: {parts}")
        return super().__new__(cls, parts)

    @property
    def weight(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        return len(self)

    def part(self, i: int) -> int:
        """lambda_i with 1-based i, zero past the end."""
        return self[i - 1] if 1 <= i <= len(self) else 0

    def cells(self) -> Iterator[tuple[int, int]]:
        for i, row in enumerate(self, 1):
            for j in range(1, row + 1):
                yield i, j

    def conjugate(self) -> "Partition":
        return conjugate(self)

    def to_json_data(self) -> list[int]:
        return list(self)

    def __repr__(self) -> str:
        return f"Partition({list(self)})"


EMPTY = Partition()


class PartitionPair(NamedTuple):
    plus: Partition
    minus: Partition

    @property
    def weight(self) -> int:
        return self.plus.weight + self.minus.weight

    def by_sign(self, sign: int) -> Partition:
        return self.plus if sign > 0 else self.minus

    def to_json_data(self) -> list[list[int]]:
        return [list(self.plus), list(self.minus)]


def as_partition(parts) -> Partition:
    return parts if isinstance(parts, Partition) else Partition(parts)


@lru_cache(maxsize=None)
def _conjugate(parts: tuple) -> tuple:
    if not parts:
        return ()
    return tuple(sum(1 for p in parts if p >= j) for j in range(1, parts[0] + 1))


def conjugate(lam) -> Partition:
    return Partition(_conjugate(tuple(lam)))


def arm(lam, i: int, j: int) -> int:
    """a_lambda(i, j) = lambda_i - j."""
    return (lam[i - 1] if i <= len(lam) else 0) - j


def leg(lam, i: int, j: int) -> int:
    """l_lambda(i, j) = lambda'_j - i."""
    conj = _conjugate(tuple(lam))
    return (conj[j - 1] if j <= len(conj) else 0) - i


class PartitionStats(NamedTuple):
    n: int
    n_conjugate: int
    f_exponent: int
    f_sign: int


def stats(lam) -> PartitionStats:
    """n(lambda), n(lambda') and f_lambda = sign * q**exponent."""
    n = sum((i - 1) * p for i, p in enumerate(lam, 1))
    n_conj = sum(p * (p - 1) // 2 for p in lam)
    return PartitionStats(n, n_conj, n_conj - n, -1 if sum(lam) % 2 else 1)


def f_factor(lam, q: Scalar) -> Scalar:
    s = stats(lam)
    return s.f_sign * q_power(q, s.f_exponent)


def c_lambda(lam, q: Scalar) -> Scalar:
    """Hook product prod (1 - q^(hook length))."""
    result = q ** 0
    for i, j in Partition(lam).cells():
        result *= 1 - q_power(q, leg(lam, i, j) + arm(lam, i, j) + 1)
    return result


def _partitions_of(n: int, largest: int) -> Iterator[tuple]:
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions_of(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def partitions_of(n: int) -> tuple[Partition, ...]:
    """Partitions of n, largest first part first."""
    return tuple(Partition(p) for p in _partitions_of(n, n))


@lru_cache(maxsize=None)
def enumerate_upto(K: int) -> tuple[Partition, ...]:
    """All partitions of weight at most K, ordered by weight then descending parts."""
    if K < 0:
        raise ValueError("K must be non-negative")
    return tuple(p for n in range(K + 1) for p in partitions_of(n))


@lru_cache(maxsize=None)
def pairs_upto(K: int) -> tuple[PartitionPair, ...]:
    """Pairs with total weight at most K, ordered by total weight."""
    parts = enumerate_upto(K)
    pairs = [PartitionPair(a, b) for a in parts for b in parts if a.weight + b.weight <= K]
    pairs.sort(key=lambda pr: pr.weight)
    return tuple(pairs)


def bar(lam) -> Partition:
    """Remove the first column."""
    return Partition(p - 1 for p in lam if p > 1)


def r_n(lam, n: int) -> Partition:
    """(lambda_1+1, ..., lambda_n+1, lambda_(n+2), ...) on the zero-padded sequence."""
    if n < 0:
        raise ValueError("n must be non-negative")
    padded = list(lam) + [0] * (n + 2)
    seq = [padded[i] + 1 for i in range(n)] + padded[n + 1:]
    return Partition(p for p in seq if p > 0)
