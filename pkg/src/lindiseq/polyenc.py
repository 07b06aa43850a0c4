"""Sparse multivariate polynomials over Z_p and the digit-encoding polynomials.

Everything here works with functions on ``Z_p^nvars``: arithmetic results are
kept with partial degrees at most ``p-1`` (``x^p = x`` as functions), which makes
the representation unique, so structural equality is functional equality.

The construction chain is

* ``lagrange`` / ``carry_poly``: the carry bit of adding two base-p digits;
* ``digit_sum_polys``: digits of ``a_1 + ... + a_T mod p^k`` as polynomials in
  the digits of the summands, built by peeling off the units digit and pushing
  ``2T - 1`` terms (the shifted summands plus the carries) into the ``k-1`` case;
* ``dot_digit_polys``: the same with ``x_i`` repeated ``u_i`` times, giving the
  digits of ``x.u``;
* ``witness_poly``: ``prod_j (Q_j^(p-1) - 1)``, which vanishes at ``delta(a)``
  exactly when ``a.u != 0``.
"""

from __future__ import annotations

from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError
from .ring import DigitVec, GroupParams, RingVec

__all__ = [
    "MultiPoly",
    "lagrange",
    "carry_poly",
    "digit_sum_polys",
    "dot_digit_polys",
    "witness_poly",
    "normalize_partial_degrees",
    "evaluate",
    "evaluation_table",
    "point_index",
    "grlex_key",
]


@lru_cache(maxsize=None)
def _reduction(p: int, top: int) -> tuple:
    """Exponent reduction table under ``x^p = x`` for exponents ``0..top``."""
    return tuple(0 if e == 0 else (e - 1) % (p - 1) + 1 for e in range(top + 1))


def _reduce_exp(e: int, p: int) -> int:
    return 0 if e == 0 else (e - 1) % (p - 1) + 1


def grlex_key(e: Sequence[int]):
    """Graded-lex order: total degree first, then larger exponent of ``x1`` first."""
    return (sum(e), tuple(-a for a in e))


class MultiPoly:
    """Polynomial over ``Z_p`` in ``nvars`` variables, stored as ``{exponents: coef}``.

    Coefficients are nonzero residues in ``[1, p)``.  Exponent vectors may exceed
    ``p-1`` only in polynomials built directly from raw terms; every arithmetic
    result is normalised.
    """

    __slots__ = ("p", "nvars", "_terms", "_hash")

    def __init__(self, p: int, nvars: int, terms: Mapping | Iterable = (), *, _trusted=False):
        self.p = p
        self.nvars = nvars
        self._hash = None
        if _trusted:
            self._terms = terms
            return
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict = {}
        for e, c in items:
            e = tuple(int(a) for a in e)
            if len(e) != nvars or any(a < 0 for a in e):
                raise DimensionError(f"bad exponent vector {e} for {nvars} variables")
            acc[e] = (acc.get(e, 0) + int(c)) % p
        self._terms = {e: c for e, c in acc.items() if c}

    # constructors

    @classmethod
    def zero(cls, p, nvars):
        return cls(p, nvars, {}, _trusted=True)

    @classmethod
    def constant(cls, p, nvars, c):
        c %= p
        return cls(p, nvars, {(0,) * nvars: c} if c else {}, _trusted=True)

    @classmethod
    def variable(cls, p, nvars, i):
        if not 0 <= i < nvars:
            raise DimensionError(f"variable index {i} out of range")
        e = [0] * nvars
        e[i] = 1
        return cls(p, nvars, {tuple(e): 1}, _trusted=True)

    # inspection

    @property
    def terms(self) -> Mapping:
        return MappingProxyType(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def partial_degree(self, i: int) -> int:
        return max((e[i] for e in self._terms), default=-1)

    def is_normalized(self) -> bool:
        top = self.p - 1
        return all(a <= top for e in self._terms for a in e)

    def normalized(self) -> "MultiPoly":
        if self.is_normalized():
            return self
        p = self.p
        acc: dict = {}
        for e, c in self._terms.items():
            r = tuple(_reduce_exp(a, p) for a in e)
            acc[r] = (acc.get(r, 0) + c) % p
        return MultiPoly(p, self.nvars, {e: c for e, c in acc.items() if c}, _trusted=True)

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.p == other.p and self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"MultiPoly(p={self.p}, nvars={self.nvars}, {self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for e in sorted(self._terms, key=grlex_key):
            factors = [str(self._terms[e])]
            for i, a in enumerate(e):
                if a == 1:
                    factors.append(f"x{i + 1}")
                elif a > 1:
                    factors.append(f"x{i + 1}^{a}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    # arithmetic

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.p != self.p or other.nvars != self.nvars:
                raise DimensionError("polynomials over different rings")
            return other
        if isinstance(other, (int, np.integer)):
            return MultiPoly.constant(self.p, self.nvars, int(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.normalized(), other.normalized()
        p = self.p
        acc = dict(a._terms)
        for e, c in b._terms.items():
            v = (acc.get(e, 0) + c) % p
            if v:
                acc[e] = v
            else:
                acc.pop(e, None)
        return MultiPoly(p, self.nvars, acc, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        p = self.p
        return MultiPoly(p, self.nvars, {e: p - c for e, c in self.normalized()._terms.items()}, _trusted=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: int) -> "MultiPoly":
        p = self.p
        c %= p
        if not c:
            return MultiPoly.zero(p, self.nvars)
        return MultiPoly(p, self.nvars, {e: v * c % p for e, v in self.normalized()._terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.normalized(), other.normalized()
        if len(a._terms) < len(b._terms):
            a, b = b, a
        p = self.p
        red = _reduction(p, 2 * p - 2)
        acc: dict = {}
        get = acc.get
        bt = list(b._terms.items())
        for e1, c1 in a._terms.items():
            for e2, c2 in bt:
                e = tuple([red[x + y] for x, y in zip(e1, e2)])
                acc[e] = get(e, 0) + c1 * c2
        return MultiPoly(p, self.nvars, {e: c % p for e, c in acc.items() if c % p}, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = MultiPoly.constant(self.p, self.nvars, 1)
        base = self.normalized()
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # evaluation and substitution

    def evaluate(self, point: Sequence[int]) -> int:
        if len(point) != self.nvars:
            raise DimensionError(f"expected {self.nvars} coordinates, got {len(point)}")
        p = self.p
        total = 0
        for e, c in self._terms.items():
            v = c
            for a, x in zip(e, point):
                if a:
                    v = v * pow(int(x), a, p) % p
            total += v
        return total % p

    __call__ = evaluate

    def compose(self, subs: Sequence["MultiPoly"]) -> "MultiPoly":
        """Substitute ``subs[i]`` for variable ``i``; all substitutes share one ring."""
        if len(subs) != self.nvars:
            raise DimensionError("need one substitute per variable")
        if not subs:
            raise DimensionError("nothing to substitute into")
        ring = subs[0]
        powers: dict = {}

        def power(i, a):
            key = (i, a)
            if key not in powers:
                powers[key] = subs[i] ** a
            return powers[key]

        out = MultiPoly.zero(ring.p, ring.nvars)
        for e, c in self._terms.items():
            term = MultiPoly.constant(ring.p, ring.nvars, c)
            for i, a in enumerate(e):
                if a:
                    term = term * power(i, a)
            out = out + term
        return out

    def embed(self, nvars: int, positions: Sequence[int]) -> "MultiPoly":
        """Rename variable ``i`` to ``positions[i]`` in a ring of ``nvars`` variables."""
        out = {}
        for e, c in self._terms.items():
            f = [0] * nvars
            for i, a in enumerate(e):
                f[positions[i]] += a
            out[tuple(f)] = c
        return MultiPoly(self.p, nvars, out)


def normalize_partial_degrees(q: MultiPoly) -> MultiPoly:
    """Same function on ``Z_p^nvars``, every exponent ``e >= 1`` reduced into ``[1, p-1]``."""
    return q.normalized()


def evaluate(q: MultiPoly, a) -> int:
    if isinstance(a, DigitVec):
        if a.p != q.p:
            raise DimensionError("digit vector over a different prime")
        a = a.digits
    return q.evaluate(a)


@lru_cache(maxsize=None)
def _power_matrix(p: int) -> np.ndarray:
    # P[a, e] = a^e mod p with 0^0 = 1
    return np.array([[pow(a, e, p) for e in range(p)] for a in range(p)], dtype=np.int64)


def evaluation_table(q: MultiPoly) -> np.ndarray:
    """Values of ``q`` at every point of ``Z_p^nvars``, flat in C order (see :func:`point_index`).

    Computed by applying the ``p x p`` power matrix along each axis of the dense
    coefficient tensor.
    """
    q = q.normalized()
    p, nv = q.p, q.nvars
    coef = np.zeros((p,) * nv, dtype=np.int64)
    for e, c in q.terms.items():
        coef[e] = c
    P = _power_matrix(p)
    vals = coef
    for axis in range(nv):
        vals = np.tensordot(P, vals, axes=([1], [axis])) % p
        vals = np.moveaxis(vals, 0, axis)
    return vals.reshape(-1)


def point_index(points: np.ndarray, p: int) -> np.ndarray:
    """Flat C-order index ``sum a_v p^(nvars-1-v)`` of each row of ``points``."""
    points = np.asarray(points, dtype=np.int64)
    nv = points.shape[1]
    weights = p ** np.arange(nv - 1, -1, -1, dtype=np.int64)
    return points @ weights


# The digit-encoding polynomials -----------------------------------------------

def lagrange(p: int, i: int) -> MultiPoly:
    """``L_i(z) = prod_{j != i} (z - j)/(i - j)``: 1 at ``i``, 0 elsewhere on ``Z_p``."""
    if not 0 <= i < p:
        raise ValueError(f"i={i} outside [0, {p})")
    z = MultiPoly.variable(p, 1, 0)
    out = MultiPoly.constant(p, 1, 1)
    for j in range(p):
        if j != i:
            out = out * (z - j) * pow(i - j, -1, p)
    return out


@lru_cache(maxsize=None)
def carry_poly(p: int) -> MultiPoly:
    """``C(x, y) = sum_{i+j >= p} L_i(x) L_j(y)``, the carry of adding two digits."""
    out = MultiPoly.zero(p, 2)
    for i in range(p):
        li = lagrange(p, i).embed(2, [0])
        for j in range(p - i, p):
            out = out + li * lagrange(p, j).embed(2, [1])
    return out


def _sum_digits(terms: list, p: int, k: int, nvars: int) -> list:
    """Digits of ``sum_t a_t mod p^k`` where ``terms[t]`` lists the k digit polynomials of ``a_t``."""
    if not terms:
        return [MultiPoly.zero(p, nvars) for _ in range(k)]
    q0 = MultiPoly.zero(p, nvars)
    for t in terms:
        q0 = q0 + t[0]
    if k == 1:
        return [q0]
    carry = carry_poly(p)
    carries = []
    running = terms[0][0]
    for t in terms[1:]:
        carries.append(carry.compose([running, t[0]]))
        running = running + t[0]
    zero = MultiPoly.zero(p, nvars)
    shifted = [t[1:] for t in terms] + [[c] + [zero] * (k - 2) for c in carries]
    return [q0] + _sum_digits(shifted, p, k - 1, nvars)


def digit_sum_polys(p: int, k: int, T: int) -> list:
    """``Q_0..Q_{k-1}`` in ``T*k`` variables with ``delta(sum a_t mod p^k) = (Q_i(delta(a_1), ..., delta(a_T)))``.

    Digit ``j`` of summand ``t`` (0-based) is variable ``t*k + j``.
    """
    if T < 1 or k < 1:
        raise ValueError("need T >= 1 and k >= 1")
    nv = T * k
    terms = [[MultiPoly.variable(p, nv, t * k + j) for j in range(k)] for t in range(T)]
    return _sum_digits(terms, p, k, nv)


def dot_digit_polys(u: RingVec) -> list:
    """``Q_0..Q_{k-1}`` in ``k*n`` variables with ``delta(a.u) = (Q_i(delta(a)))`` for all ``a``."""
    pr = u.params
    p, k, n = pr.p, pr.k, pr.n
    nv = k * n
    terms = []
    for i, ui in enumerate(u.coords):
        digit_vars = [MultiPoly.variable(p, nv, j * n + i) for j in range(k)]
        terms.extend([digit_vars] * ui)
    return _sum_digits(terms, p, k, nv)


def witness_poly(u: RingVec) -> MultiPoly:
    """``Q_u``: zero at ``delta(a)`` iff ``a.u != 0 mod p^k``; total degree at most ``D``."""
    if u.is_zero():
        raise ValueError("u must be nonzero")
    p = u.params.p
    out = MultiPoly.constant(p, u.params.nvars, 1)
    for qj in dot_digit_polys(u):
        out = out * (qj ** (p - 1) - 1)
    return out
