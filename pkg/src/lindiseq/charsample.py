"""Character samplers over ``A = Z_{p^k}^n``.

Characters are indexed by ``x`` in ``A`` via ``chi_x(y) = w^(x.y)`` with ``w`` a
primitive ``p^k``-th root of unity.  Three sources are provided:

* ``uniform``: every ``x`` with probability ``1/|A|``;
* ``avoid-kernel``: supported on ``S' = {x : x.u != 0}``, either exactly uniform
  there or tilted (a block of ``S'`` is overweighted to the tolerance limit);
* ``half-fourier``: the output distribution of half-Fourier sampling for a hidden
  shift ``u``, conditioned on not aborting, followed by raising the character to a
  uniformly random unit power.

Randomness comes from numpy's Philox-4x64 counter-based generator keyed by
``(seed, stream)``.  :func:`sample` cuts the requested count into fixed blocks of
:data:`BLOCK` draws and keys block ``b`` with stream ``b``, so a sample file depends
only on the source and the seed, not on how many workers produced it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import mpmath
import numpy as np

from .errors import CapacityError, StructureError
from .groups import Subgroup
from .numtheory import disequation_weight_mean
from .ring import GroupParams, RingVec, all_elements, as_fraction, flat_index

__all__ = [
    "BLOCK",
    "make_rng",
    "SampleSource",
    "WeightTable",
    "sample",
    "draw",
    "halffourier_weights",
    "twisted_weights",
    "power_twist",
    "power_twist_array",
    "restrict_character",
    "restrict_array",
    "random_extension",
    "extension_array",
    "embedded_subgroup",
]

BLOCK = 4096
ENUMERATION_CAP = 10**6
# Decimal digits carried for half-Fourier weights that are not rational.
HF_DIGITS = 40

UNIFORM = "uniform"
AVOID_KERNEL = "avoid-kernel"
HALF_FOURIER = "half-fourier"
KINDS = (UNIFORM, AVOID_KERNEL, HALF_FOURIER)
TILTS = ("uniform", "adversarial")


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    mask = (1 << 64) - 1
    return np.random.Generator(np.random.Philox(key=[seed & mask, stream & mask]))


@dataclass(frozen=True)
class WeightTable:
    """Probabilities indexed by the lexicographic flat index of ``x``.

    ``weights`` holds :class:`fractions.Fraction` when ``exact`` and ``mpmath.mpf``
    values carrying :data:`HF_DIGITS` digits otherwise.
    """

    params: GroupParams
    weights: tuple = field(repr=False)
    exact: bool = True

    def __getitem__(self, x) -> object:
        if isinstance(x, RingVec):
            x = x.coords
        if not isinstance(x, (int, np.integer)):
            x = int(flat_index(np.asarray([x]), self.params)[0])
        return self.weights[x]

    def __len__(self):
        return len(self.weights)

    def total(self):
        return sum(self.weights, Fraction(0) if self.exact else mpmath.mpf(0))

    def as_float(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights], dtype=np.float64)


def _check_enumerable(params: GroupParams):
    if params.order > ENUMERATION_CAP:
        raise CapacityError(f"|A| = {params.order} exceeds the enumeration cap")


@lru_cache(maxsize=256)
def _elements(params: GroupParams) -> np.ndarray:
    arr = all_elements(params)
    arr.setflags(write=False)
    return arr


def _dots(params: GroupParams, u: Sequence[int]) -> np.ndarray:
    """``x.u mod q`` for every ``x`` in flat order."""
    return (_elements(params) @ np.asarray(u, dtype=np.int64)) % params.q


@dataclass(frozen=True)
class SampleSource:
    """A distribution over characters of ``A``.

    ``kind`` is one of ``uniform``, ``avoid-kernel``, ``half-fourier``.  ``u`` is the
    hidden element for the latter two, ``c`` the tolerance of an ``avoid-kernel``
    source and ``tilt`` its shape inside the tolerance envelope.
    """

    params: GroupParams
    kind: str = UNIFORM
    u: Optional[tuple] = None
    c: object = 1
    tilt: str = "uniform"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.tilt not in TILTS:
            raise ValueError(f"unknown tilt {self.tilt!r}")
        if as_fraction(self.c) < 1:
            raise ValueError("tolerance c must be at least 1")
        if self.kind == UNIFORM:
            object.__setattr__(self, "u", None)
            return
        if self.u is None:
            raise ValueError(f"{self.kind} source needs u")
        u = self.u.coords if isinstance(self.u, RingVec) else self.u
        u = self.params.vec(u).coords
        if len(u) != self.params.n:
            raise ValueError("u has the wrong length")
        if not any(u):
            raise ValueError("u must be nonzero")
        object.__setattr__(self, "u", u)

    @classmethod
    def uniform(cls, params, seed=0):
        return cls(params, UNIFORM, seed=seed)

    @classmethod
    def avoid_kernel(cls, params, u, c=1, tilt="uniform", seed=0):
        return cls(params, AVOID_KERNEL, tuple(u), c, tilt, seed)

    @classmethod
    def half_fourier(cls, params, u, seed=0):
        return cls(params, HALF_FOURIER, tuple(u), 2, "uniform", seed)

    def with_seed(self, seed: int) -> "SampleSource":
        return SampleSource(self.params, self.kind, self.u, self.c, self.tilt, seed)

    @property
    def tolerance(self) -> Fraction:
        """Tolerance parameter the source is guaranteed to satisfy."""
        if self.kind == HALF_FOURIER:
            return Fraction(2)
        if self.kind == UNIFORM:
            return Fraction(1)
        return as_fraction(self.c)

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.u is not None:
            out["u"] = list(self.u)
        if self.kind == AVOID_KERNEL:
            c = as_fraction(self.c)
            out["c"] = int(c) if c.denominator == 1 else str(c)
            out["tilt"] = self.tilt
        return out

    def weights(self) -> WeightTable:
        """Exact distribution of a single draw."""
        _check_enumerable(self.params)
        size = self.params.order
        if self.kind == UNIFORM:
            return WeightTable(self.params, (Fraction(1, size),) * size)
        if self.kind == HALF_FOURIER:
            return twisted_weights(self.params.vec(self.u))
        return _avoid_kernel_weights(self.params, self.u, as_fraction(self.c), self.tilt)

    def probabilities(self) -> np.ndarray:
        """Float64 probabilities in flat order (cached)."""
        return _probabilities(self.with_seed(0))


@lru_cache(maxsize=4096)
def _probabilities(source: SampleSource) -> np.ndarray:
    probs = source.weights().as_float()
    probs /= probs.sum()
    probs.setflags(write=False)
    return probs


def _heavy_count(support: int, c: Fraction) -> int:
    # Largest block that can carry c/|S'| each while the rest stays >= 1/(c|S'|).
    return min(support // 2, math.floor(support / (c + 1)))


def _avoid_kernel_weights(params, u, c: Fraction, tilt: str) -> WeightTable:
    dots = _dots(params, u)
    support = np.flatnonzero(dots)
    s = len(support)
    w = [Fraction(0)] * params.order
    if tilt == "uniform" or c == 1:
        for i in support:
            w[i] = Fraction(1, s)
    else:
        h = _heavy_count(s, c)
        heavy = Fraction(c, s) if h else Fraction(0)
        light = (1 - h * heavy) / (s - h)
        for rank, i in enumerate(support):
            w[i] = heavy if rank < h else light
    return WeightTable(params, tuple(w))


def _avoid_kernel_draw(source: SampleSource, count: int, rng) -> np.ndarray:
    params = source.params
    u = np.asarray(source.u, dtype=np.int64)
    out = []
    have = 0
    while have < count:
        want = max(64, 2 * (count - have))
        xs = rng.integers(0, params.q, size=(want, params.n), dtype=np.int64)
        keep = xs[(xs @ u) % params.q != 0]
        out.append(keep)
        have += len(keep)
    return np.concatenate(out)[:count] if out else np.zeros((0, params.n), dtype=np.int64)


def _table_draw(probs: np.ndarray, params: GroupParams, count: int, rng) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    idx = np.minimum(idx, len(cdf) - 1)
    return _elements(params)[idx]


def draw(source: SampleSource, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent draws from ``source`` using ``rng``; shape ``(count, n)``."""
    params = source.params
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count == 0:
        return np.zeros((0, params.n), dtype=np.int64)
    if source.kind == UNIFORM:
        return rng.integers(0, params.q, size=(count, params.n), dtype=np.int64)
    if source.kind == AVOID_KERNEL:
        if source.tilt == "uniform" or as_fraction(source.c) == 1:
            return _avoid_kernel_draw(source, count, rng)
        _check_enumerable(params)
        return _table_draw(source.probabilities(), params, count, rng)
    # half-Fourier: draw from the (untwisted) sampling distribution, then twist
    _check_enumerable(params)
    table = _hf_float(params, source.u)
    xs = _table_draw(table, params, count, rng)
    return power_twist_array(xs, params, rng)


@lru_cache(maxsize=1024)
def _hf_float(params, u) -> np.ndarray:
    probs = halffourier_weights(params.vec(u)).as_float()
    probs /= probs.sum()
    probs.setflags(write=False)
    return probs


def sample(source: SampleSource, count: int, jobs: int = 1) -> np.ndarray:
    """Deterministic draws for ``source.seed``: block ``b`` of :data:`BLOCK` uses stream ``b``."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    nblocks = -(-count // BLOCK)
    sizes = [min(BLOCK, count - b * BLOCK) for b in range(nblocks)]

    def block(b):
        return draw(source, sizes[b], make_rng(source.seed, b))

    if jobs > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(block, range(nblocks)))
    else:
        parts = [block(b) for b in range(nblocks)]
    if not parts:
        return np.zeros((0, source.params.n), dtype=np.int64)
    return np.concatenate(parts)


# Half-Fourier sampling weights ------------------------------------------------

def _rational_cos(t: int, q: int):
    """``cos(2 pi t / q)`` when it is rational (q in {1, 2, 3, 4, 6}), else ``None``."""
    t %= q
    g = math.gcd(t, q)
    num, den = t // g, q // g
    table = {
        (0, 1): Fraction(1),
        (1, 2): Fraction(-1),
        (1, 3): Fraction(-1, 2),
        (2, 3): Fraction(-1, 2),
        (1, 4): Fraction(0),
        (3, 4): Fraction(0),
        (1, 6): Fraction(1, 2),
        (5, 6): Fraction(1, 2),
    }
    return table.get((num, den))


def halffourier_weights(u: RingVec) -> WeightTable:
    """Probability of each character after half-Fourier sampling, given no abort.

    ``weight(x) = |1 - w^(x.u)|^2 / (2|A|) = (1 - cos(2 pi (x.u) / q)) / |A|``.
    Exact rationals when every cosine involved is rational, otherwise mpmath
    values at :data:`HF_DIGITS` digits.
    """
    params = u.params
    if u.is_zero():
        raise ValueError("u must be nonzero")
    _check_enumerable(params)
    q, size = params.q, params.order
    dots = _dots(params, u.coords)
    cos_exact = [_rational_cos(t, q) for t in range(q)]
    if all(c is not None for c in cos_exact):
        vals = [(1 - c) / size for c in cos_exact]
        return WeightTable(params, tuple(vals[t] for t in dots))
    with mpmath.workdps(HF_DIGITS + 10):
        vals = [(1 - mpmath.cos(2 * mpmath.pi * t / q)) / size for t in range(q)]
    return WeightTable(params, tuple(vals[t] for t in dots), exact=False)


def twisted_weights(u: RingVec) -> WeightTable:
    """Distribution after the random unit power, as exact rationals.

    A character with ``t = x.u`` keeps weight ``mean_j |1 - w^(jt)|^2 / (2|A|)``
    averaged over units ``j``; ``w^t`` has order ``q / gcd(t, q)`` and the average
    has a closed form.
    """
    params = u.params
    if u.is_zero():
        raise ValueError("u must be nonzero")
    _check_enumerable(params)
    q, size = params.q, params.order
    vals = [Fraction(0)] * q
    for t in range(1, q):
        vals[t] = disequation_weight_mean(q, q // math.gcd(t, q)) / size
    dots = _dots(params, u.coords)
    return WeightTable(params, tuple(vals[t] for t in dots))


def units(q: int) -> np.ndarray:
    return np.array([j for j in range(1, q + 1) if math.gcd(j, q) == 1], dtype=np.int64)


def power_twist(x: RingVec, rng: np.random.Generator) -> RingVec:
    """``j x`` for ``j`` uniform over the units modulo ``p^k``."""
    q = x.params.q
    us = units(q)
    j = int(us[rng.integers(0, len(us))])
    return x.scale(j)


def power_twist_array(xs: np.ndarray, params: GroupParams, rng) -> np.ndarray:
    us = units(params.q)
    js = us[rng.integers(0, len(us), size=len(xs))]
    return (xs * js[:, None]) % params.q


# Restriction and extension ----------------------------------------------------

def _restriction_data(H: Subgroup):
    amb = H.ambient
    M = amb.exponent
    weights = np.array([M // m for m in amb.orders], dtype=np.int64)
    B = H.basis_matrix() * weights  # pairing-scaled basis, shape (m, rank)
    ds = np.array(H.invariants, dtype=np.int64)
    return M, B, ds


def restrict_character(x, H: Subgroup) -> tuple:
    """Index of ``chi_x`` restricted to ``H`` in ``Z_{d_1} + ... + Z_{d_m}``.

    Component ``j`` is ``pairing(x, h_j) / (M / d_j) mod d_j`` with ``M`` the ambient
    exponent; it is integral because ``chi_x(h_j)`` is a ``d_j``-th root of unity.
    """
    x = x.coords if isinstance(x, RingVec) else tuple(x)
    out = restrict_array(np.asarray([x], dtype=np.int64), H)
    return tuple(int(a) for a in out[0])


def restrict_array(xs: np.ndarray, H: Subgroup) -> np.ndarray:
    M, B, ds = _restriction_data(H)
    if len(ds) == 0:
        return np.zeros((len(xs), 0), dtype=np.int64)
    t = (np.asarray(xs, dtype=np.int64) @ B.T) % M
    steps = M // ds
    if np.any(t % steps):
        raise StructureError("basis orders are inconsistent with the subgroup")
    return (t // steps) % ds


def random_extension(chi: Sequence[int], orders: Sequence[int], rng) -> tuple:
    """Uniform extension of a character of ``H = Z_{d_1} + ... + Z_{d_m}`` to ``Z_d^m``.

    ``H`` sits in ``Z_d^m`` (``d = max d_j``) as ``(d/d_1)Z_d + ... + (d/d_m)Z_d``; the
    extensions of ``b`` are exactly the ``x`` with ``x_j = b_j mod d_j``.
    """
    chi = tuple(int(b) for b in chi)
    if len(chi) != len(orders) or any(not 0 <= b < d for b, d in zip(chi, orders)):
        raise ValueError("chi is not a character index of H")
    return tuple(int(a) for a in extension_array(np.asarray([chi], dtype=np.int64), orders, rng)[0])


def extension_array(bs: np.ndarray, orders: Sequence[int], rng) -> np.ndarray:
    ds = np.asarray(orders, dtype=np.int64)
    if len(ds) == 0:
        return np.zeros((len(bs), 0), dtype=np.int64)
    d = int(ds.max())
    span = d // ds
    r = rng.integers(0, np.broadcast_to(span, bs.shape), dtype=np.int64)
    return bs + ds * r


def embedded_subgroup(orders: Sequence[int], p: int) -> Subgroup:
    """``H = (d/d_1)Z_d + ... + (d/d_m)Z_d`` inside ``Z_d^m`` as a :class:`Subgroup`."""
    from .groups import AbelianPGroup

    d = max(orders)
    m = len(orders)
    amb = AbelianPGroup(p, (d,) * m)
    gens = []
    for j, dj in enumerate(orders):
        e = [0] * m
        e[j] = d // dj
        gens.append(tuple(e))
    return Subgroup(amb, tuple(gens))
