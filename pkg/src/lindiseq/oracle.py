"""Brute-force baselines used to cross-check the fast algorithms.

Everything here is plain enumeration.  Nothing is imported from the polynomial,
decision or search modules; only the group parameters and the sample sources
(for drawing) are shared.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .charsample import draw, make_rng
from .errors import CapacityError
from .ring import GroupParams, RingVec

__all__ = [
    "consistent_u_set",
    "kernels_cover",
    "grm_min_weight_brute",
    "grm_standard_weight",
    "cyclic_span",
    "exhaustive_sample_size",
    "ExhaustiveResult",
    "search_exhaustive",
]

GROUP_CAP = 10**6
SEARCH_CAP = 10**4
GRM_CAP = 1 << 20
# stream key for the baseline's own draws, apart from the ones the descent uses
_ORACLE_STREAM = (1 << 48) + 7


def _group(params: GroupParams, cap: int = GROUP_CAP) -> np.ndarray:
    if params.order > cap:
        raise CapacityError(f"|A| = {params.order} exceeds {cap}")
    return np.array(list(itertools.product(range(params.q), repeat=params.n)), dtype=np.int64).reshape(-1, params.n)


def _sample_matrix(samples, params: GroupParams) -> np.ndarray:
    rows = [s.coords if isinstance(s, RingVec) else tuple(s) for s in samples]
    return np.array(rows, dtype=np.int64).reshape(-1, params.n) % params.q


def _consistent_mask(xs: np.ndarray, params: GroupParams, group: np.ndarray) -> np.ndarray:
    # u = 0 lies in every kernel, so it is never a candidate
    ok = np.any(group != 0, axis=1)
    for start in range(0, len(xs), 512):
        dots = (xs[start:start + 512] @ group.T) % params.q
        ok &= np.all(dots != 0, axis=0)
    return ok


def consistent_u_set(samples, params: GroupParams) -> set:
    """Every nonzero ``u`` with ``x.u != 0`` for all samples ``x``."""
    group = _group(params)
    xs = _sample_matrix(samples, params)
    ok = _consistent_mask(xs, params, group)
    return {params.vec(tuple(int(a) for a in g)) for g in group[ok]}


def kernels_cover(samples, params: GroupParams) -> bool:
    """Whether every ``y`` lies in the kernel of some sampled character."""
    group = _group(params)
    xs = _sample_matrix(samples, params)
    covered = np.zeros(len(group), dtype=bool)
    for start in range(0, len(xs), 512):
        dots = (xs[start:start + 512] @ group.T) % params.q
        covered |= np.any(dots == 0, axis=0)
    return bool(covered.all())


def grm_min_weight_brute(p: int, nvars: int, D: int) -> int:
    """Minimum Hamming weight of a nonzero evaluation vector of a degree-``<= D`` polynomial.

    Enumerates every coefficient vector over the monomials with exponents below
    ``p`` and total degree at most ``D``.
    """
    monos = [e for e in itertools.product(range(p), repeat=nvars) if sum(e) <= D]
    if p ** len(monos) > GRM_CAP:
        raise CapacityError(f"{p}^{len(monos)} polynomials is too many to enumerate")
    points = list(itertools.product(range(p), repeat=nvars))
    cols = np.array([[math.prod(pow(a, e, p) for a, e in zip(pt, m)) % p for m in monos] for pt in points],
                    dtype=np.int64)
    best = len(points)
    for coeffs in itertools.product(range(p), repeat=len(monos)):
        if not any(coeffs):
            continue
        values = cols @ np.array(coeffs, dtype=np.int64) % p
        best = min(best, int(np.count_nonzero(values)))
    return best


def grm_standard_weight(p: int, nvars: int, D: int) -> int:
    """``(p - s) p^(m - r - 1)`` with ``min(D, m(p-1)) = r(p-1) + s``, ``0 <= s < p-1``."""
    D = min(D, nvars * (p - 1))
    r, s = divmod(D, p - 1)
    if r == nvars:
        return 1
    return (p - s) * p ** (nvars - r - 1)


def cyclic_span(g, q: int) -> frozenset:
    """The multiples of ``g`` modulo ``q``."""
    g = tuple(int(a) % q for a in g)
    return frozenset(tuple(t * a % q for a in g) for t in range(q))


def _spans_contain(g, vs, q: int) -> np.ndarray:
    """For each row ``v`` of ``vs``, whether some multiple ``t v`` equals ``g``."""
    multiples = (np.arange(q, dtype=np.int64)[:, None, None] * np.asarray(vs, dtype=np.int64)[None]) % q
    return np.any(np.all(multiples == np.asarray(g, dtype=np.int64), axis=2), axis=0)


def exhaustive_sample_size(params: GroupParams) -> int:
    p, k, n = params.p, params.k, params.n
    return math.ceil(4 * k * n * p**k * math.log(p * params.q**n))


@dataclass
class ExhaustiveResult:
    kind: str
    generator: Optional[tuple] = None
    ambiguous: bool = False
    consistent: int = 0

    def to_json(self, with_trace: bool = False) -> dict:
        out = {"result": self.kind}
        if self.generator is not None:
            out["generator"] = list(self.generator)
        if self.ambiguous:
            out["ambiguous"] = True
        out["consistent"] = self.consistent
        return out


def search_exhaustive(source, c=1, count: Optional[int] = None) -> ExhaustiveResult:
    """Baseline search: draw a large sample and keep every ``u`` it does not rule out.

    ``c`` is accepted for parity with :func:`lindiseq.search.search`; the sample
    size ``ceil(4 k n p^k ln(p q^n))`` does not depend on it.

    For a kernel-avoiding source every ``v`` with ``u`` in ``<v>`` survives, so the
    survivors of least order generate ``<u>``.  The result is flagged ambiguous if
    some survivor's cyclic group misses the chosen generator.
    """
    params = source.params
    if params.order > SEARCH_CAP:
        raise CapacityError(f"|A| = {params.order} exceeds {SEARCH_CAP}")
    N = exhaustive_sample_size(params) if count is None else count
    xs = draw(source, N, make_rng(source.seed, _ORACLE_STREAM))
    group = _group(params)
    # distinct samples only; repeats rule nothing new out
    weights = params.q ** np.arange(params.n - 1, -1, -1, dtype=np.int64)
    xs = group[np.flatnonzero(np.bincount(xs @ weights, minlength=len(group)))]
    survivors = group[_consistent_mask(xs, params, group)]
    if not len(survivors):
        return ExhaustiveResult("UniformSource")
    q = params.q
    orders = q // np.gcd.reduce(np.concatenate([survivors, np.full((len(survivors), 1), q)], axis=1), axis=1)
    # least order first, ties broken lexicographically (group rows are already in that order)
    g = tuple(int(a) for a in survivors[int(np.argmin(orders))])
    ambiguous = not bool(_spans_contain(g, survivors, q).all())
    return ExhaustiveResult("Generator", g, ambiguous, len(survivors))
