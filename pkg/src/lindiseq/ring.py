"""Arithmetic in Z_{p^k} and Z_p, vectors over Z_{p^k}, and the base-p digit map.

Digit layout: the digit vector of ``a = (a_1, ..., a_n)`` has length ``k*n`` and
stores digit ``j`` of coordinate ``i`` (0-based) at flat index ``j*n + i``, so the
vector is grouped by digit layer: all units digits first, then all p-digits,
and so on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError

__all__ = [
    "is_prime",
    "GroupParams",
    "RingVec",
    "DigitVec",
    "dot",
    "digits",
    "undigits",
    "delta_vec",
    "delta_vec_inv",
    "witness_degree_bound",
    "all_elements",
    "flat_index",
    "digit_array",
    "valuation",
]

# Canonical representatives are stored in int64 arrays in the bulk paths.
_WORD_LIMIT = 2**31


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def valuation(x: int, p: int, cap: int) -> int:
    """p-adic valuation of ``x`` modulo ``p**cap``; zero has valuation ``cap``."""
    x %= p**cap
    if x == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def witness_degree_bound(p: int, k: int) -> int:
    """Total degree bound ``(p-1)((2p-2)^k - 1)/(2p-3)`` for witness polynomials."""
    num = (p - 1) * ((2 * p - 2) ** k - 1)
    den = 2 * p - 3
    if num % den:
        raise ArithmeticError("degree bound is not integral")  # cannot happen: geometric sum
    return num // den


@dataclass(frozen=True)
class GroupParams:
    """The group ``A = Z_{p^k}^n`` together with its derived constants."""

    p: int
    k: int
    n: int

    def __post_init__(self):
        for name in ("p", "k", "n"):
            if not isinstance(getattr(self, name), (int, np.integer)):
                raise TypeError(f"{name} must be an integer")
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.k < 1 or self.n < 1:
            raise ValueError("k and n must be positive")
        if self.p**self.k >= _WORD_LIMIT:
            raise ValueError("p^k does not fit the canonical word size")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "n", int(self.n))

    @property
    def q(self) -> int:
        return self.p**self.k

    @property
    def order(self) -> int:
        """``|A| = q^n``."""
        return self.q**self.n

    @property
    def nvars(self) -> int:
        return self.k * self.n

    @property
    def D(self) -> int:
        return witness_degree_bound(self.p, self.k)

    @property
    def effective_degree(self) -> int:
        """``min(D, (p-1)kn)``.

        Partial degrees are capped at ``p-1``, so no monomial in ``kn`` variables
        exceeds total degree ``(p-1)kn``; beyond that the space stops growing.
        """
        return min(self.D, (self.p - 1) * self.nvars)

    def vec(self, coords: Iterable[int]) -> "RingVec":
        return RingVec(self, tuple(int(c) % self.q for c in coords))

    def zero(self) -> "RingVec":
        return RingVec(self, (0,) * self.n)


@dataclass(frozen=True)
class RingVec:
    params: GroupParams
    coords: tuple

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        if len(coords) != self.params.n:
            raise DimensionError(f"expected {self.params.n} coordinates, got {len(coords)}")
        q = self.params.q
        if any(not 0 <= c < q for c in coords):
            raise ValueError(f"coordinates must lie in [0, {q})")
        object.__setattr__(self, "coords", coords)

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def _check(self, other):
        if not isinstance(other, RingVec) or other.params != self.params:
            raise DimensionError("vectors belong to different groups")

    def __add__(self, other):
        self._check(other)
        q = self.params.q
        return RingVec(self.params, tuple((a + b) % q for a, b in zip(self, other)))

    def __sub__(self, other):
        self._check(other)
        q = self.params.q
        return RingVec(self.params, tuple((a - b) % q for a, b in zip(self, other)))

    def __neg__(self):
        q = self.params.q
        return RingVec(self.params, tuple(-a % q for a in self))

    def scale(self, t: int) -> "RingVec":
        q = self.params.q
        return RingVec(self.params, tuple(t * a % q for a in self))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def order(self) -> int:
        """Additive order of the vector in ``A``."""
        p, k = self.params.p, self.params.k
        v = min(valuation(c, p, k) for c in self.coords)
        return p ** (k - v)


@dataclass(frozen=True)
class DigitVec:
    p: int
    digits: tuple

    def __post_init__(self):
        ds = tuple(int(d) for d in self.digits)
        if any(not 0 <= d < self.p for d in ds):
            raise ValueError(f"digits must lie in [0, {self.p})")
        object.__setattr__(self, "digits", ds)

    def __iter__(self):
        return iter(self.digits)

    def __len__(self):
        return len(self.digits)

    def __getitem__(self, i):
        return self.digits[i]


def dot(x: RingVec, y: RingVec) -> int:
    """``sum x_i y_i mod p^k``."""
    if x.params != y.params:
        raise DimensionError("vectors belong to different groups")
    return sum(a * b for a, b in zip(x.coords, y.coords)) % x.params.q


def digits(a: int, p: int, k: int) -> tuple:
    """Base-p expansion ``(a_0, ..., a_{k-1})`` of ``0 <= a < p^k``."""
    if not 0 <= a < p**k:
        raise ValueError(f"{a} is not in [0, {p}^{k})")
    out = []
    for _ in range(k):
        a, r = divmod(a, p)
        out.append(r)
    return tuple(out)


def undigits(ds: Sequence[int], p: int) -> int:
    return sum(d * p**j for j, d in enumerate(ds))


def delta_vec(a: RingVec) -> DigitVec:
    p, k, n = a.params.p, a.params.k, a.params.n
    flat = [0] * (k * n)
    for i, c in enumerate(a.coords):
        for j, d in enumerate(digits(c, p, k)):
            flat[j * n + i] = d
    return DigitVec(p, tuple(flat))


def delta_vec_inv(d: DigitVec, params: GroupParams) -> RingVec:
    p, k, n = params.p, params.k, params.n
    if d.p != p or len(d) != k * n:
        raise DimensionError("digit vector does not match the group")
    coords = tuple(undigits([d[j * n + i] for j in range(k)], p) for i in range(n))
    return RingVec(params, coords)


# Bulk helpers over int64 arrays of shape (N, n).  Rows are canonical representatives.

def all_elements(params: GroupParams) -> np.ndarray:
    """Every element of ``A`` in lexicographic order, shape ``(q^n, n)``.

    Row ``r`` is the element whose flat index (see :func:`flat_index`) is ``r``.
    """
    q, n = params.q, params.n
    grid = np.indices((q,) * n, dtype=np.int64)
    return grid.reshape(n, -1).T.copy()


def flat_index(coords: np.ndarray, params: GroupParams) -> np.ndarray:
    """Lexicographic index ``sum x_i q^(n-1-i)`` of each row."""
    coords = np.asarray(coords, dtype=np.int64)
    weights = params.q ** np.arange(params.n - 1, -1, -1, dtype=np.int64)
    return coords @ weights


def digit_array(coords: np.ndarray, params: GroupParams) -> np.ndarray:
    """Row-wise ``delta``: shape ``(N, n)`` to ``(N, k*n)`` with the digit-layer layout."""
    coords = np.asarray(coords, dtype=np.int64)
    p, k = params.p, params.k
    layers = []
    rest = coords.copy()
    for _ in range(k):
        layers.append(rest % p)
        rest //= p
    return np.concatenate(layers, axis=1)


def as_fraction(c) -> Fraction:
    """Exact rational view of a tolerance given as int, float, str or Fraction."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, float):
        return Fraction(c).limit_denominator(10**9)
    return Fraction(c)
