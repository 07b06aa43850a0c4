"""Arithmetic functions and exact sums of roots of unity over coprime residues."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "ArithFnTable",
    "arith_table",
    "coprime_root_sum_closed",
    "coprime_root_sum_numeric",
    "disequation_weight_mean",
]


@dataclass(frozen=True)
class ArithFnTable:
    """Sieved tables of the Moebius function, Euler's totient and the radical on ``1..m_max``.

    Index 0 of every table is unused and holds 0.
    """

    m_max: int
    mobius: tuple = field(repr=False)
    phi: tuple = field(repr=False)
    radical: tuple = field(repr=False)

    @classmethod
    def build(cls, m_max: int) -> "ArithFnTable":
        if m_max < 1:
            raise ValueError("m_max must be positive")
        size = m_max + 1
        mu = [1] * size
        phi = list(range(size))
        rad = [1] * size
        is_composite = [False] * size
        mu[0] = phi[0] = rad[0] = 0
        for q in range(2, size):
            if is_composite[q]:
                continue
            for m in range(q, size, q):
                if m > q:
                    is_composite[m] = True
                mu[m] = -mu[m]
                phi[m] -= phi[m] // q
                rad[m] *= q
            for m in range(q * q, size, q * q):
                mu[m] = 0
        return cls(m_max, tuple(mu), tuple(phi), tuple(rad))

    def _check(self, m):
        if not 1 <= m <= self.m_max:
            raise ValueError(f"{m} outside the table range 1..{self.m_max}")

    def mu(self, m: int) -> int:
        self._check(m)
        return self.mobius[m]

    def totient(self, m: int) -> int:
        self._check(m)
        return self.phi[m]

    def rad(self, m: int) -> int:
        self._check(m)
        return self.radical[m]


@lru_cache(maxsize=8)
def _cached_table(m_max: int) -> ArithFnTable:
    return ArithFnTable.build(m_max)


def arith_table(m: int) -> ArithFnTable:
    """A table covering at least ``1..m`` (sizes are rounded up to share sieves)."""
    size = 64
    while size < m:
        size *= 4
    return _cached_table(size)


def coprime_root_sum_closed(m: int, m0: int) -> int:
    """Exact value of ``sum_{0<j<=m, (j,m)=1} w^j`` for ``w`` a primitive ``m0``-th root of unity.

    With ``m1`` the radical of ``m`` the sum is ``mu(m0) (m/m1) phi(m1/m0)`` when
    ``m0 | m1`` and 0 otherwise.
    """
    if m < 1 or m0 < 1 or m % m0:
        raise ValueError(f"need m0 | m with m, m0 >= 1 (got m={m}, m0={m0})")
    t = arith_table(m)
    m1 = t.rad(m)
    if m1 % m0:
        return 0
    return t.mu(m0) * (m // m1) * t.totient(m1 // m0)


def coprime_root_sum_numeric(m: int, m0: int) -> complex:
    """Floating-point ``sum_{0<j<=m, (j,m)=1} exp(2 pi i j / m0)``; cross-check for the closed form."""
    if m0 < 1 or m % m0:
        raise ValueError(f"need m0 | m (got m={m}, m0={m0})")
    # j = m is coprime to m only for m = 1, where it is the single summand.
    total = 0j
    for j in range(1, m + 1):
        if math.gcd(j, m) == 1:
            total += cmath.exp(2j * math.pi * j / m0)
    return total


def disequation_weight_mean(m: int, m0: int) -> Fraction:
    """``(1/(2 phi(m))) sum_{0<j<=m, (j,m)=1} |1 - w^j|^2`` for ``w`` of order ``m0 >= 2``.

    Uses ``|1 - w^j|^2 = 2 - w^j - w^-j``; the coprime set is closed under negation,
    so the value is ``1 - S/phi(m)`` with ``S`` the coprime root sum.  Always in
    ``[1/2, 2]``.
    """
    if m0 == 1:
        raise ValueError("the root of unity must differ from 1 (m0 >= 2)")
    if m0 < 1 or m % m0:
        raise ValueError(f"need m0 | m (got m={m}, m0={m0})")
    phi = arith_table(m).totient(m)
    return 1 - Fraction(coprime_root_sum_closed(m, m0), phi)
