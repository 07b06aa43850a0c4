"""Exhaustive invariant suites at desk scale.

Each suite checks one identity over every case in its parameter range and
reports how many cases it ran, how long it took and the first failure found.
Reference values are computed directly (integer arithmetic, enumeration of
group elements), not through the code under test.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import charsample, numtheory, oracle, polyenc
from .groups import AbelianPGroup, Subgroup
from .ring import GroupParams, all_elements, digit_array, is_prime, witness_degree_bound

__all__ = ["SuiteReport", "SUITES", "run_suite", "run_all", "desk_params"]


@dataclass
class SuiteReport:
    name: str
    ranges: str
    passed: bool
    cases: int
    seconds: float = 0.0
    failure: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "suite": self.name,
            "ranges": self.ranges,
            "status": "PASS" if self.passed else "FAIL",
            "cases": self.cases,
            "seconds": round(self.seconds, 3),
        }
        if self.failure:
            out["failure"] = self.failure
        out.update(self.extra)
        return out


class _Tally:
    def __init__(self):
        self.cases = 0
        self.failure = None

    def check(self, ok, message):
        self.cases += 1
        if not ok and self.failure is None:
            self.failure = message() if callable(message) else message


def desk_params(max_order: int, primes=None, max_k: int = 8, max_n: int = 8):
    """Every ``(p, k, n)`` with ``p^(kn) <= max_order``."""
    out = []
    for p in range(2, max_order + 1):
        if not is_prime(p) or (primes is not None and p not in primes):
            continue
        for k in range(1, max_k + 1):
            for n in range(1, max_n + 1):
                if p ** (k * n) <= max_order:
                    out.append(GroupParams(p, k, n))
    return out


def _nonzero(params: GroupParams):
    for u in itertools.product(range(params.q), repeat=params.n):
        if any(u):
            yield params.vec(u)


# Individual suites ------------------------------------------------------------

def sieve_suite(m_max: int = 36) -> _Tally:
    """Closed-form coprime root sums against direct floating summation."""
    t = _Tally()
    for m in range(1, m_max + 1):
        for m0 in range(1, m + 1):
            if m % m0:
                continue
            closed = numtheory.coprime_root_sum_closed(m, m0)
            numeric = numtheory.coprime_root_sum_numeric(m, m0)
            t.check(abs(closed - numeric) < 1e-9, lambda: f"m={m} m0={m0}: {closed} vs {numeric}")
    return t


def almost_uniform_suite(m_max: int = 36) -> _Tally:
    """The averaged disequation weight lies in [1/2, 2] and equals 2 for m0 = 2."""
    t = _Tally()
    for m in range(2, m_max + 1):
        for m0 in range(2, m + 1):
            if m % m0:
                continue
            w = numtheory.disequation_weight_mean(m, m0)
            # independent value: average of |1 - w^j|^2 / 2 over units j
            units = [j for j in range(1, m + 1) if math.gcd(j, m) == 1]
            direct = sum(1 - math.cos(2 * math.pi * j / m0) for j in units) / len(units)
            t.check(Fraction(1, 2) <= w <= 2, lambda: f"m={m} m0={m0}: {w} outside [1/2, 2]")
            t.check(abs(float(w) - direct) < 1e-9, lambda: f"m={m} m0={m0}: {w} vs direct {direct}")
            if m0 == 2:
                t.check(w == 2, lambda: f"m={m} m0=2: {w} != 2")
    return t


def twisted_sampling_suite(max_order: int = 64) -> _Tally:
    """Exact twisted weights: zero exactly off the support, within [1/(2|S'|), 2/|S'|] on it."""
    t = _Tally()
    for params in desk_params(max_order):
        xs = all_elements(params)
        for u in _nonzero(params):
            table = charsample.twisted_weights(u)
            dots = (xs @ np.asarray(u.coords)) % params.q
            support = int(np.count_nonzero(dots))
            lo, hi = Fraction(1, 2 * support), Fraction(2, support)
            zero_ok = all((table[i] == 0) == (dots[i] == 0) for i in range(params.order))
            env_ok = all(lo <= table[i] <= hi for i in range(params.order) if dots[i])
            t.check(zero_ok, lambda: f"{params} u={u.coords}: zero pattern differs from the kernel")
            t.check(env_ok, lambda: f"{params} u={u.coords}: weight outside the envelope")
            t.check(table.total() == 1, lambda: f"{params} u={u.coords}: total {table.total()}")
    return t


def _cases_pk():
    return [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)]


def carry_suite() -> _Tally:
    t = _Tally()
    for p in (2, 3, 5, 7):
        C = polyenc.carry_poly(p)
        t.check(C.degree <= 2 * p - 2, f"p={p}: deg C = {C.degree}")
        for a in range(p):
            for b in range(p):
                t.check(C((a, b)) == int(a + b >= p), f"p={p}: C({a},{b}) = {C((a, b))}")
    return t


def _digit_columns(values: np.ndarray, p: int, k: int) -> np.ndarray:
    cols = []
    for _ in range(k):
        cols.append(values % p)
        values = values // p
    return np.stack(cols, axis=1)


def digit_sum_suite(T_max: int = 4) -> _Tally:
    """Digit-sum polynomials reproduce addition mod p^k on every input."""
    t = _Tally()
    for p, k in _cases_pk():
        q = p**k
        for T in range(1, T_max + 1):
            polys = polyenc.digit_sum_polys(p, k, T)
            for i, Q in enumerate(polys):
                t.check(Q.degree <= (2 * p - 2) ** i, f"p={p} k={k} T={T}: deg Q_{i} = {Q.degree}")
            # rows of all T-tuples of summands; variable t*k + j is digit j of summand t
            summands = np.indices((q,) * T).reshape(T, -1).T
            points = np.concatenate([_digit_columns(summands[:, s], p, k) for s in range(T)], axis=1)
            expect = _digit_columns(summands.sum(axis=1) % q, p, k)
            idx = polyenc.point_index(points, p)
            for i, Q in enumerate(polys):
                got = polyenc.evaluation_table(Q)[idx]
                t.check(np.array_equal(got, expect[:, i]), f"p={p} k={k} T={T}: digit {i} wrong")
    return t


def dot_digits_suite(n_max: int = 2) -> _Tally:
    """Scalar-product digit polynomials reproduce ``a.u`` on every ``a``, for every ``u``."""
    t = _Tally()
    for p, k in _cases_pk():
        for n in range(1, n_max + 1):
            params = GroupParams(p, k, n)
            xs = all_elements(params)
            idx = polyenc.point_index(digit_array(xs, params), p)
            for u in itertools.product(range(params.q), repeat=n):
                polys = polyenc.dot_digit_polys(params.vec(u))
                expect = _digit_columns((xs @ np.asarray(u)) % params.q, p, k)
                for i, Q in enumerate(polys):
                    t.check(Q.degree <= (2 * p - 2) ** i, f"{params} u={u}: deg Q_{i} = {Q.degree}")
                    got = polyenc.evaluation_table(Q)[idx]
                    t.check(np.array_equal(got, expect[:, i]), f"{params} u={u}: digit {i} wrong")
    return t


def witness_suite(max_order: int = 729) -> _Tally:
    """``Q_u(delta(a)) = 0`` exactly when ``a.u != 0``, with ``deg Q_u <= D``."""
    t = _Tally()
    expected_D = {(2, 1): 1, (2, 2): 3, (3, 1): 2, (3, 2): 10}
    for (p, k), D in expected_D.items():
        t.check(witness_degree_bound(p, k) == D, f"p={p} k={k}: D = {witness_degree_bound(p, k)}")
    for params in desk_params(max_order, primes=(2, 3), max_k=2, max_n=3):
        xs = all_elements(params)
        idx = polyenc.point_index(digit_array(xs, params), params.p)
        for u in _nonzero(params):
            Q = polyenc.witness_poly(u)
            t.check(Q.degree <= params.D and Q.is_normalized(), f"{params} u={u.coords}: deg {Q.degree}")
            vanish = polyenc.evaluation_table(Q)[idx] == 0
            avoid = (xs @ np.asarray(u.coords)) % params.q != 0
            t.check(np.array_equal(vanish, avoid), f"{params} u={u.coords}: zero set differs")
    return t


GRM_RANGES = [(2, m, D) for m in range(1, 5) for D in range(0, 4)] + \
             [(3, m, D) for m in range(1, 3) for D in range(0, 3)]


def grm_suite() -> _Tally:
    """Brute-force minimum weights against the closed form and the bound used by the budget."""
    t = _Tally()
    for p, m, D in GRM_RANGES:
        w = oracle.grm_min_weight_brute(p, m, D)
        bound = p ** (m - min(m, -(-D // (p - 1))))
        t.check(w >= bound, f"p={p} m={m} D={D}: weight {w} < {bound}")
        std = oracle.grm_standard_weight(p, m, D)
        t.check(w == std, f"p={p} m={m} D={D}: weight {w} != {std}")
    return t


def _ambient_groups(max_order: int):
    """All ``Z_{p^k1} + ... + Z_{p^kn}`` (k1 >= ... >= kn >= 1) of order at most ``max_order``."""
    out = []
    for p in range(2, max_order + 1):
        if not is_prime(p):
            continue

        def parts(remaining, cap):
            yield ()
            for e in range(min(cap, remaining), 0, -1):
                for rest in parts(remaining - e, e):
                    yield (e,) + rest

        top = int(math.log(max_order, p) + 1e-9)
        for exps in parts(top, top):
            if exps:
                out.append(AbelianPGroup(p, tuple(p**e for e in exps)))
    return out


def _all_subgroups(G: AbelianPGroup) -> list:
    """Every subgroup of ``G``, found by adjoining one element at a time from the trivial group."""
    elems = list(G.elements())
    index = {g: i for i, g in enumerate(elems)}
    add = [[index[G.reduce(tuple(a + b for a, b in zip(x, y)))] for y in elems] for x in elems]
    zero = index[(0,) * G.rank]
    found = {frozenset([zero]): ()}
    frontier = [frozenset([zero])]
    while frontier:
        nxt = []
        for H in frontier:
            gens = found[H]
            done = set(H)
            for g in range(len(elems)):
                if g in done:
                    continue
                K = set(H)
                layer = set(H)
                while True:
                    layer = {add[h][g] for h in layer}
                    if layer <= K:
                        break
                    K |= layer
                K = frozenset(K)
                done |= K
                if K not in found:
                    found[K] = gens + (elems[g],)
                    nxt.append(K)
        frontier = nxt
    return [Subgroup(G, gens) for gens in found.values()]


def extension_suite(max_order: int = 64) -> _Tally:
    """Restriction after extension is the identity, and extension counts are ``|A'/H|``."""
    t = _Tally()
    rng = charsample.make_rng(0, 0)
    for G in _ambient_groups(max_order):
        elems = np.array(list(G.elements()), dtype=np.int64)
        for H in _all_subgroups(G):
            if H.is_trivial:
                continue
            ds = H.invariants
            # every character of G restricts; each character of H has |G|/|H| preimages
            bs = charsample.restrict_array(elems, H)
            counts = {}
            for b in map(tuple, bs):
                counts[b] = counts.get(b, 0) + 1
            nchar = math.prod(ds)
            t.check(len(counts) == nchar and set(counts.values()) == {G.order // H.order},
                    f"{G.orders} H={H.invariants}: restriction counts {sorted(set(counts.values()))}")
            # the embedded copy of H inside Z_d^m
            emb = charsample.embedded_subgroup(ds, G.p)
            target = emb.ambient
            span = target.order // emb.order
            chars = np.array(list(itertools.product(*(range(d) for d in ds))), dtype=np.int64)
            ext = charsample.extension_array(np.repeat(chars, 4, axis=0), ds, rng)
            back = charsample.restrict_array(ext, emb)
            t.check(np.array_equal(back, np.repeat(chars, 4, axis=0)),
                    f"{G.orders} H={ds}: restrict(extend(b)) != b")
            tgt = np.array(list(target.elements()), dtype=np.int64)
            tb = charsample.restrict_array(tgt, emb)
            fibres = {}
            for b in map(tuple, tb):
                fibres[b] = fibres.get(b, 0) + 1
            t.check(len(fibres) == nchar and set(fibres.values()) == {span},
                    f"{G.orders} H={ds}: extension fibres {sorted(set(fibres.values()))} != {span}")
    return t


@dataclass(frozen=True)
class Suite:
    name: str
    ranges: str
    run: Callable[[], _Tally]


SUITES = {
    "sieve": Suite("sieve", "m <= 36, every m0 | m", sieve_suite),
    "almost-uniform": Suite("almost-uniform", "m <= 36, every m0 | m with m0 >= 2", almost_uniform_suite),
    "twisted-sampling": Suite("twisted-sampling", "p^(kn) <= 64, every u != 0", twisted_sampling_suite),
    "carry": Suite("carry", "p in {2, 3, 5, 7}, all digit pairs", carry_suite),
    "digit-sum": Suite("digit-sum", "p=2 k<=3, p=3 k<=2, T<=4, all inputs", digit_sum_suite),
    "dot-digits": Suite("dot-digits", "p=2 k<=3, p=3 k<=2, n<=2, every u and a", dot_digits_suite),
    "witness": Suite("witness", "p in {2, 3}, k<=2, n<=3, p^(kn)<=729, every u != 0", witness_suite),
    "grm-distance": Suite("grm-distance", "p=2 m<=4 D<=3, p=3 m<=2 D<=2", grm_suite),
    "extension": Suite("extension", "every abelian p-group of order <= 64, every subgroup", extension_suite),
}


def run_suite(name: str) -> SuiteReport:
    suite = SUITES[name]
    start = time.perf_counter()
    try:
        tally = suite.run()
        failure = tally.failure
        cases = tally.cases
    except Exception as exc:  # a crash is a failed suite, reported like any other
        failure, cases = f"{type(exc).__name__}: {exc}", 0
    seconds = time.perf_counter() - start
    return SuiteReport(name, suite.ranges, failure is None, cases, seconds, failure)


def run_all(only=None) -> list:
    names = list(SUITES) if not only else list(only)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    return [run_suite(n) for n in names]
