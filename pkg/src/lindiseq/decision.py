"""Deciding between a nearly uniform source and a kernel-avoiding one.

Samples ``a`` are mapped through the digit map to points of ``Z_p^(kn)`` and
each point contributes the row ``(M(delta(a)))_M`` of monomial values, ``M``
running over the basis of polynomials with total degree at most ``D`` and
partial degrees at most ``p-1``.  The row space has full rank ``Delta`` exactly
when no nonzero polynomial of that space vanishes on every sample.  A
kernel-avoiding source always leaves the witness polynomial ``Q_u`` in the
common zero space, so full rank certifies uniformity; the converse error is
bounded by the sample budget of :func:`required_sample_size`.

Sample budget.  While a nonzero polynomial still vanishes on all rows so far,
a fresh row enlarges the row space with probability at least
``s = p^(-ceil(D'/(p-1))) / c`` (minimum weight of the evaluation code, with
``D' = min(D, (p-1)kn)``).  With ``N = (2 Delta + 10 ln(1/eps)/ln 3) / s`` the
expected number of enlarging rows is ``mu >= 2 Delta + L``; a multiplicative
Chernoff bound puts the chance of fewer than ``Delta`` of them below
``exp(-(Delta + L)/4) <= eps``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, InsufficientSamplesError
from .polyenc import MultiPoly, grlex_key
from .ring import GroupParams, RingVec, as_fraction, digit_array

__all__ = [
    "Verdict",
    "MonomialBasis",
    "monomial_basis",
    "count_monomials",
    "eval_row",
    "eval_rows",
    "RankAccumulator",
    "matrix_rank_mod_p",
    "required_sample_size",
    "DecisionResult",
    "decide",
    "decide_point_set",
    "extract_witness",
]

MONOMIAL_CAP = 200_000


class Verdict(str, enum.Enum):
    UNIFORM = "Uniform"
    AVOIDS_KERNEL = "AvoidsKernel"


@lru_cache(maxsize=None)
def count_monomials(p: int, nvars: int, D: int) -> int:
    """Number of exponent vectors with entries in ``[0, p)`` and sum at most ``D``."""
    if D < 0:
        return 0
    if nvars == 0:
        return 1
    return sum(count_monomials(p, nvars - 1, D - e) for e in range(min(p - 1, D) + 1))


@dataclass(frozen=True)
class MonomialBasis:
    p: int
    nvars: int
    D: int
    monomials: tuple = field(repr=False)

    @property
    def delta(self) -> int:
        return len(self.monomials)

    def __len__(self):
        return len(self.monomials)

    def exponent_matrix(self) -> np.ndarray:
        return _exponent_matrix(self)

    def polynomial(self, coeffs: Sequence[int]) -> MultiPoly:
        if len(coeffs) != self.delta:
            raise DimensionError("coefficient vector has the wrong length")
        return MultiPoly(self.p, self.nvars, {e: int(c) for e, c in zip(self.monomials, coeffs)})

    def coefficients(self, q: MultiPoly) -> np.ndarray:
        """Coordinates of ``q`` in this basis (``q`` must lie in the span)."""
        index = {e: i for i, e in enumerate(self.monomials)}
        out = np.zeros(self.delta, dtype=np.int64)
        for e, c in q.normalized().terms.items():
            if e not in index:
                raise ValueError(f"monomial {e} is outside the space")
            out[index[e]] = c
        return out


@lru_cache(maxsize=64)
def _exponent_matrix(basis: MonomialBasis) -> np.ndarray:
    arr = np.array(basis.monomials, dtype=np.int64).reshape(basis.delta, basis.nvars)
    arr.setflags(write=False)
    return arr


def _enumerate_exponents(p: int, nvars: int, D: int):
    if nvars == 0:
        yield ()
        return
    for e in range(min(p - 1, D) + 1):
        for rest in _enumerate_exponents(p, nvars - 1, D - e):
            yield (e,) + rest


@lru_cache(maxsize=64)
def _basis(p: int, nvars: int, D: int, cap: int) -> MonomialBasis:
    size = count_monomials(p, nvars, D)
    if size > cap:
        raise CapacityError(f"Delta = {size} exceeds the monomial cap {cap}")
    monos = sorted(_enumerate_exponents(p, nvars, D), key=grlex_key)
    return MonomialBasis(p, nvars, D, tuple(monos))


def monomial_basis(params: GroupParams, cap: int = MONOMIAL_CAP) -> MonomialBasis:
    """Monomials of the witness space for ``params`` in graded-lex order (constant first)."""
    return _basis(params.p, params.nvars, params.effective_degree, cap)


def eval_rows(points: np.ndarray, basis: MonomialBasis) -> np.ndarray:
    """Monomial values at each row of ``points`` (digit vectors), shape ``(len(points), Delta)``."""
    points = np.asarray(points, dtype=np.int64)
    if points.ndim != 2 or points.shape[1] != basis.nvars:
        raise DimensionError(f"points must have {basis.nvars} coordinates")
    p = basis.p
    E = basis.exponent_matrix()
    powers = np.array([[pow(a, e, p) for e in range(p)] for a in range(p)], dtype=np.int64)
    rows = np.ones((len(points), basis.delta), dtype=np.int64)
    for v in range(basis.nvars):
        col = E[:, v]
        if not col.any():
            continue
        rows = rows * powers[points[:, v][:, None], col[None, :]] % p
    return rows


def eval_row(a, basis: MonomialBasis) -> np.ndarray:
    digits = a.digits if hasattr(a, "digits") else tuple(a)
    return eval_rows(np.asarray([digits]), basis)[0]


class RankAccumulator:
    """Incremental reduced row-echelon form over ``Z_p``.

    Stored rows are fully reduced, each with a leading 1 in its pivot column and
    zeros in every other pivot column, so reducing a new row is one matrix
    product.
    """

    def __init__(self, p: int, width: int):
        self.p = p
        self.width = width
        self._rows = np.zeros((0, width), dtype=np.int64)
        self.pivots: list = []
        self.rows_seen = 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def full(self) -> bool:
        return self.rank == self.width

    @property
    def echelon(self) -> np.ndarray:
        return self._rows.copy()

    def reduce(self, row) -> np.ndarray:
        row = np.asarray(row, dtype=np.int64) % self.p
        if self.pivots:
            row = (row - row[self.pivots] @ self._rows) % self.p
        return row

    def add(self, row) -> bool:
        """Insert ``row``; return whether the rank grew."""
        if len(row) != self.width:
            raise DimensionError(f"row must have length {self.width}")
        self.rows_seen += 1
        r = self.reduce(row)
        nz = np.flatnonzero(r)
        if len(nz) == 0:
            return False
        p = self.p
        col = int(nz[0])
        r = r * pow(int(r[col]), -1, p) % p
        if len(self.pivots):
            factors = self._rows[:, col].copy()
            self._rows = (self._rows - factors[:, None] * r[None, :]) % p
        self._rows = np.vstack([self._rows, r])
        self.pivots.append(col)
        return True

    def kernel_vector(self) -> Optional[np.ndarray]:
        """A nonzero vector orthogonal to every stored row, or ``None`` at full rank."""
        if self.full:
            return None
        piv = set(self.pivots)
        free = next(j for j in range(self.width) if j not in piv)
        v = np.zeros(self.width, dtype=np.int64)
        v[free] = 1
        for i, c in enumerate(self.pivots):
            v[c] = -self._rows[i, free] % self.p
        return v


def matrix_rank_mod_p(M: np.ndarray, p: int) -> int:
    """Rank of an integer matrix over ``Z_p`` by batched Gaussian elimination."""
    A = np.asarray(M, dtype=np.int64) % p
    rows, cols = A.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        nz = np.flatnonzero(A[rank:, col])
        if len(nz) == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        A[rank] = A[rank] * pow(int(A[rank, col]), -1, p) % p
        below = A[rank + 1:, col]
        hit = np.flatnonzero(below)
        if len(hit):
            idx = rank + 1 + hit
            A[idx] = (A[idx] - below[hit][:, None] * A[rank][None, :]) % p
        rank += 1
    return rank


def required_sample_size(params: GroupParams, c=1, target_error: float = 1 / 3) -> int:
    """``ceil((2 Delta + 10 ln(1/eps) / ln 3) * c * p^ceil(D'/(p-1)))``."""
    c = as_fraction(c)
    if c < 1:
        raise ValueError("tolerance c must be at least 1")
    if not 0 < target_error < 1:
        raise ValueError("target_error must lie in (0, 1)")
    p = params.p
    delta = count_monomials(p, params.nvars, params.effective_degree)
    spread = p ** -(-params.effective_degree // (p - 1))
    slack = 10 * math.log(1 / target_error) / math.log(3)
    value = (2 * delta + slack) * float(c) * spread
    # absorb float noise so exact integers are not bumped up by one
    return math.ceil(value - 1e-9)


@dataclass
class DecisionResult:
    verdict: Verdict
    rank: int
    delta: int
    rows_consumed: int
    required: int = 0
    accumulator: Optional[RankAccumulator] = field(default=None, repr=False)
    basis: Optional[MonomialBasis] = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "rank": self.rank,
            "delta": self.delta,
            "rows_consumed": self.rows_consumed,
        }


def _as_array(samples, params: GroupParams) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        arr = samples.astype(np.int64, copy=False)
    else:
        arr = np.array([s.coords if isinstance(s, RingVec) else tuple(s) for s in samples], dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, params.n)
    if arr.ndim != 2 or arr.shape[1] != params.n:
        raise DimensionError(f"samples must have {params.n} coordinates")
    if arr.min() < 0 or arr.max() >= params.q:
        raise ValueError(f"sample coordinates must lie in [0, {params.q})")
    return arr


def decide(samples, params: GroupParams, c=1, target_error: float = 1 / 3,
           jobs: int = 1, chunk: int = 4096) -> DecisionResult:
    """Run the rank test on ``samples`` in order, stopping early once the rank is full.

    Raises :class:`InsufficientSamplesError` when fewer samples than
    :func:`required_sample_size` are supplied.  Row evaluation for each chunk of
    new points may be spread over ``jobs`` threads; insertion stays sequential,
    so the result does not depend on ``jobs``.
    """
    xs = _as_array(samples, params)
    need = required_sample_size(params, c, target_error)
    if len(xs) < need:
        raise InsufficientSamplesError(need, len(xs))
    basis = monomial_basis(params)
    acc = RankAccumulator(params.p, basis.delta)
    seen: set = set()
    consumed = len(xs)
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for start in range(0, len(xs), chunk):
            block = xs[start:start + chunk]
            digits = digit_array(block, params)
            fresh = []
            for off, key in enumerate(map(bytes, digits.astype(np.int8))):
                if key not in seen:
                    seen.add(key)
                    fresh.append(off)
            if not fresh:
                continue
            pts = digits[fresh]
            if pool is not None and len(pts) > 1:
                parts = np.array_split(pts, jobs)
                rows = np.concatenate(list(pool.map(lambda a: eval_rows(a, basis), parts)))
            else:
                rows = eval_rows(pts, basis)
            done = False
            for off, row in zip(fresh, rows):
                acc.add(row)
                if acc.full:
                    consumed = start + off + 1
                    done = True
                    break
            if done:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    verdict = Verdict.UNIFORM if acc.full else Verdict.AVOIDS_KERNEL
    return DecisionResult(verdict, acc.rank, basis.delta, consumed, need, acc, basis)


@lru_cache(maxsize=8192)
def _point_set_rank(p: int, nvars: int, D: int, mask: bytes) -> int:
    basis = _basis(p, nvars, D, MONOMIAL_CAP)
    flags = np.frombuffer(mask, dtype=np.uint8)
    idx = np.flatnonzero(flags)
    points = np.array(np.unravel_index(idx, (p,) * nvars), dtype=np.int64).T.reshape(-1, nvars)
    return matrix_rank_mod_p(eval_rows(points, basis), p)


def decide_point_set(mask: np.ndarray, params: GroupParams) -> tuple:
    """Verdict from the set of distinct digit points hit by the samples.

    ``mask`` flags the points of ``Z_p^(kn)`` in C order.  The row space of the
    rank test depends only on which points occur, so this is the same verdict
    :func:`decide` reaches after consuming the whole sample; ranks are memoised
    per point set.  Returns ``(verdict, rank, Delta)``.
    """
    delta = count_monomials(params.p, params.nvars, params.effective_degree)
    m = np.ascontiguousarray(mask, dtype=np.uint8)
    if int(m.sum()) < delta:
        # fewer distinct rows than columns: the rank cannot be full
        rank = _point_set_rank(params.p, params.nvars, params.effective_degree, m.tobytes())
        return Verdict.AVOIDS_KERNEL, rank, delta
    rank = _point_set_rank(params.p, params.nvars, params.effective_degree, m.tobytes())
    verdict = Verdict.UNIFORM if rank == delta else Verdict.AVOIDS_KERNEL
    return verdict, rank, delta


def extract_witness(acc: RankAccumulator, basis: MonomialBasis) -> Optional[MultiPoly]:
    """A nonzero polynomial vanishing on every consumed sample, or ``None`` at full rank."""
    v = acc.kernel_vector()
    if v is None:
        return None
    return basis.polynomial(v)
