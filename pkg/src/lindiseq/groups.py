"""Finite abelian p-groups ``Z_{p^k1} + ... + Z_{p^kn}`` and their subgroups.

Subgroups are given by generators.  A cyclic (invariant-factor) basis is computed
by p-adic elimination: all coordinates are scaled into ``Z_{p^K}`` with ``K`` the
largest exponent, and at each step the generator entry of least p-adic valuation
is taken as pivot.  Because that entry divides every remaining entry, clearing
its column from the other generators splits off a direct cyclic summand.  No
column operations are needed, so the basis vectors are honest ambient elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, PreconditionError
from .ring import GroupParams, is_prime, valuation

__all__ = ["AbelianPGroup", "BasisElement", "Subgroup"]

ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class AbelianPGroup:
    p: int
    orders: tuple

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        orders = tuple(int(m) for m in self.orders)
        exps = []
        for m in orders:
            e = 0
            mm = m
            while mm % self.p == 0:
                mm //= self.p
                e += 1
            if mm != 1:
                raise ValueError(f"order {m} is not a power of {self.p}")
            exps.append(e)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "_exps", tuple(exps))

    @classmethod
    def from_params(cls, params: GroupParams) -> "AbelianPGroup":
        return cls(params.p, (params.q,) * params.n)

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def exponent(self) -> int:
        return max(self.orders, default=1)

    @property
    def order(self) -> int:
        out = 1
        for m in self.orders:
            out *= m
        return out

    @property
    def exponent_log(self) -> int:
        return max(self._exps, default=0)

    def reduce(self, x: Iterable[int]) -> tuple:
        x = tuple(int(a) for a in x)
        if len(x) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates")
        return tuple(a % m for a, m in zip(x, self.orders))

    def element_order(self, x: Sequence[int]) -> int:
        x = self.reduce(x)
        K = self.exponent_log
        P = self.p**K
        v = min((valuation(a * (P // m), self.p, K) for a, m in zip(x, self.orders)), default=K)
        return self.p ** (K - v)

    def elements(self) -> Iterable[tuple]:
        if self.order > ENUMERATION_CAP:
            raise CapacityError(f"group of order {self.order} is too large to enumerate")
        return itertools.product(*(range(m) for m in self.orders))

    def pairing(self, x: Sequence[int], y: Sequence[int]) -> int:
        """Exponent ``t`` with ``chi_x(y) = exp(2 pi i t / exponent)``."""
        M = self.exponent
        return sum(a * b * (M // m) for a, b, m in zip(x, y, self.orders)) % M

    def full(self) -> "Subgroup":
        gens = []
        for i in range(self.rank):
            e = [0] * self.rank
            e[i] = 1
            gens.append(tuple(e))
        return Subgroup(self, tuple(gens))

    def trivial(self) -> "Subgroup":
        return Subgroup(self, ())


@dataclass(frozen=True)
class BasisElement:
    element: tuple
    order: int
    pivot: int  # coordinate index used for membership reduction
    valuation: int  # p-adic valuation of the scaled pivot entry


@dataclass(frozen=True)
class Subgroup:
    ambient: AbelianPGroup
    generators: tuple = field(default=())

    def __post_init__(self):
        gens = tuple(self.ambient.reduce(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)

    def __eq__(self, other):
        if not isinstance(other, Subgroup) or other.ambient != self.ambient:
            return NotImplemented
        return self.order == other.order and all(other.contains(g) for g in self.generators)

    def __hash__(self):
        return hash((self.ambient, self.order))

    def __repr__(self):
        desc = ", ".join(f"{b.element}:{b.order}" for b in self.basis)
        return f"Subgroup(<{desc}> in {self.ambient.orders})"

    @cached_property
    def _scales(self) -> tuple:
        P = self.ambient.p ** self.ambient.exponent_log
        return tuple(P // m for m in self.ambient.orders)

    @cached_property
    def basis(self) -> tuple:
        """Cyclic basis ``h_1..h_m`` with orders ``d_1 >= ... >= d_m`` and ``d_{j+1} | d_j``."""
        p = self.ambient.p
        K = self.ambient.exponent_log
        P = p**K
        scales = self._scales
        rows = [[a * s % P for a, s in zip(g, scales)] for g in self.generators]
        out = []
        while rows:
            best = None
            for ri, row in enumerate(rows):
                for ci, a in enumerate(row):
                    if a:
                        v = valuation(a, p, K)
                        if best is None or v < best[0]:
                            best = (v, ri, ci)
            if best is None:
                break
            v, ri, ci = best
            row = rows.pop(ri)
            pv = p**v
            inv = pow(row[ci] // pv, -1, P)
            row = [a * inv % P for a in row]
            for other in rows:
                f = other[ci] // pv
                if f:
                    for j in range(len(other)):
                        other[j] = (other[j] - f * row[j]) % P
            element = tuple(a // s for a, s in zip(row, scales))
            out.append(BasisElement(element, p ** (K - v), ci, v))
        return tuple(out)

    @property
    def invariants(self) -> tuple:
        return tuple(b.order for b in self.basis)

    @property
    def order(self) -> int:
        out = 1
        for b in self.basis:
            out *= b.order
        return out

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def is_cyclic(self) -> bool:
        return len(self.basis) <= 1

    @property
    def is_trivial(self) -> bool:
        return not self.basis

    def coordinates(self, x: Sequence[int]):
        """Coefficients of ``x`` in the cyclic basis, or ``None`` if ``x`` is not in the subgroup."""
        p = self.ambient.p
        K = self.ambient.exponent_log
        P = p**K
        scales = self._scales
        y = [a * s % P for a, s in zip(self.ambient.reduce(x), scales)]
        coeffs = []
        for b in self.basis:
            pv = p**b.valuation
            if y[b.pivot] % pv:
                return None
            # the stored element is normalised so its scaled pivot entry is exactly p^v
            f = (y[b.pivot] // pv) % b.order
            coeffs.append(f)
            scaled = [a * s for a, s in zip(b.element, scales)]
            y = [(ya - f * h) % P for ya, h in zip(y, scaled)]
        if any(y):
            return None
        return tuple(coeffs)

    def contains(self, x: Sequence[int]) -> bool:
        return self.coordinates(x) is not None

    def contains_subgroup(self, other: "Subgroup") -> bool:
        return all(self.contains(g) for g in other.generators)

    def elements(self) -> set:
        if self.order > ENUMERATION_CAP:
            raise CapacityError(f"subgroup of order {self.order} is too large to enumerate")
        orders = self.ambient.orders
        out = set()
        for coeffs in itertools.product(*(range(b.order) for b in self.basis)):
            x = [0] * self.ambient.rank
            for c, b in zip(coeffs, self.basis):
                for i, h in enumerate(b.element):
                    x[i] += c * h
            out.add(tuple(a % m for a, m in zip(x, orders)))
        return out

    def basis_matrix(self) -> np.ndarray:
        return np.array([b.element for b in self.basis], dtype=np.int64).reshape(-1, self.ambient.rank)

    def multiple(self, t: int) -> "Subgroup":
        """``tU``."""
        return Subgroup(self.ambient, tuple(tuple(t * a for a in b.element) for b in self.basis))

    def generator(self) -> tuple:
        if not self.is_cyclic:
            raise PreconditionError("subgroup is not cyclic")
        if self.is_trivial:
            return (0,) * self.ambient.rank
        return self.basis[0].element

    # Subgroups used by the descent.

    def maximal_cyclic(self) -> "Subgroup":
        """``pU``, the unique maximal subgroup of a nontrivial cyclic p-group ``U``."""
        if not self.is_cyclic:
            raise PreconditionError("subgroup is not cyclic")
        if self.is_trivial:
            raise PreconditionError("the trivial group has no maximal subgroup")
        return self.multiple(self.ambient.p)

    def plane_quotient(self):
        """Subgroups ``(M1, M2, M)`` of index ``p``, ``p`` and ``p^2`` with ``M = M1 & M2``.

        With ``h_1, h_2`` the first two basis vectors, ``M1`` replaces ``h_1`` by
        ``p h_1``, ``M2`` does the same for ``h_2``; ``U/M`` is then ``Z_p^2``.
        """
        if self.is_cyclic:
            raise PreconditionError("subgroup is cyclic; use maximal_cyclic")
        p = self.ambient.p
        hs = [b.element for b in self.basis]
        ph1 = tuple(p * a for a in hs[0])
        ph2 = tuple(p * a for a in hs[1])
        rest = tuple(hs[2:])
        m1 = Subgroup(self.ambient, (ph1, hs[1]) + rest)
        m2 = Subgroup(self.ambient, (hs[0], ph2) + rest)
        m = Subgroup(self.ambient, (ph1, ph2) + rest)
        return m1, m2, m

    def index_p_family(self) -> list:
        """The ``p + 1`` subgroups of index ``p`` containing ``M`` (lines of ``U/M = Z_p^2``)."""
        _, _, m = self.plane_quotient()
        p = self.ambient.p
        h1, h2 = self.basis[0].element, self.basis[1].element
        lines = [tuple(a + lam * b for a, b in zip(h1, h2)) for lam in range(p)]
        lines.append(h2)
        return [Subgroup(self.ambient, m.generators + (line,)) for line in lines]
