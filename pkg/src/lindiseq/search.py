"""Recovering ``<u>`` from a kernel-avoiding source by subgroup descent.

The descent keeps a subgroup ``U`` known to contain ``u``.  A decision call on
a subgroup ``H`` restricts fresh ambient samples to ``H``, embeds the restricted
characters into ``Z_{d_1}^m`` by a uniformly random extension and runs the rank
test there.  The restricted source still avoids the kernel of ``u`` when
``u`` lies in ``H`` and is nearly uniform on all of ``H^*`` otherwise, so the
answer says whether ``u`` is in ``H``.

* ``U`` not cyclic: ``U`` is the union of the ``p + 1`` index-``p`` subgroups
  containing a fixed index-``p^2`` subgroup; move to the first one that answers
  AvoidsKernel.
* ``U`` cyclic: move to ``pU`` if it answers AvoidsKernel, otherwise ``U = <u>``.

Errors are one-sided.  A subgroup that contains ``u`` always answers
AvoidsKernel; only subgroups missing ``u`` can answer wrongly.  Each call gets
``target_error / L`` with ``L = 1 + (p + 1) log_p |A|`` the largest possible
number of calls, so the whole descent fails with probability at most
``target_error``.

Two sampling modes give the same verdict distribution.  ``stream`` draws and
transforms the samples one by one.  ``histogram`` (enumerable groups only)
draws the multinomial count of every ambient character, spreads each
restricted count over its extensions and decides from the set of points hit,
which is all the rank test depends on once the whole budget is consumed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .charsample import (
    SampleSource,
    draw,
    extension_array,
    make_rng,
    restrict_array,
)
from .decision import Verdict, decide, decide_point_set, required_sample_size
from .errors import InconsistencyError, PreconditionError
from .groups import AbelianPGroup, Subgroup
from .ring import GroupParams, all_elements, as_fraction, digit_array

__all__ = [
    "SearchResult",
    "SubgroupDecision",
    "cyclic_basis",
    "index_p_subgroup_family",
    "maximal_subgroup_cyclic",
    "decision_on_subgroup",
    "search",
    "subcall_bound",
]

UNIFORM_SOURCE = "UniformSource"
GENERATOR = "Generator"

HISTOGRAM_CAP = 1 << 16
# decision calls draw from Philox streams above this offset; sample() uses 0, 1, ...
_CALL_STREAM_BASE = 1 << 40


def cyclic_basis(H: Subgroup) -> list:
    """``[(h_j, d_j)]`` with ``d_1 >= d_2 >= ...`` generating ``H`` as a direct sum."""
    return [(b.element, b.order) for b in H.basis]


def index_p_subgroup_family(U: Subgroup) -> list:
    return U.index_p_family()


def maximal_subgroup_cyclic(U: Subgroup) -> Subgroup:
    return U.maximal_cyclic()


def subcall_bound(params: GroupParams) -> int:
    """Largest number of decision calls one descent over ``A`` can make."""
    return 1 + (params.p + 1) * params.k * params.n


@dataclass
class SubgroupDecision:
    verdict: Verdict
    order: int
    invariants: tuple
    samples: int
    rank: int
    delta: int

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "invariants": list(self.invariants),
            "verdict": self.verdict.value,
            "samples": self.samples,
            "rank": self.rank,
            "delta": self.delta,
        }


@dataclass
class SearchResult:
    kind: str
    generator: Optional[tuple] = None
    depth: int = 0
    trace: list = field(default_factory=list)
    calls: int = 0

    def to_json(self, with_trace: bool = False) -> dict:
        out = {"result": self.kind}
        if self.generator is not None:
            out["generator"] = list(self.generator)
        out["depth"] = self.depth
        if with_trace:
            out["trace"] = self.trace
        return out


def _embedded_params(H: Subgroup) -> GroupParams:
    ds = H.invariants
    kappa = round(math.log(ds[0], H.ambient.p))
    return GroupParams(H.ambient.p, kappa, len(ds))


def _hist_tables(H: Subgroup):
    # keyed by the basis itself: equal subgroups with different bases index H^* differently
    return _hist_tables_for(H.ambient, tuple(b.element for b in H.basis))


@lru_cache(maxsize=4096)
def _hist_tables_for(amb: AbelianPGroup, basis: tuple):
    """Per ambient element: restricted index, and the point layout of the extensions."""
    H = Subgroup(amb, basis)
    params = GroupParams(amb.p, amb.exponent_log, amb.rank)
    xs = all_elements(params)
    bs = restrict_array(xs, H)
    ds = np.array(H.invariants, dtype=np.int64)
    d = int(ds.max())
    # index of each restricted character in Z_{d_1} + ... + Z_{d_m}
    b_index = np.ravel_multi_index(tuple(bs.T), tuple(ds))
    nchar = int(np.prod(ds))
    # every extension x = b + ds * r, r in prod(d/ds), as a digit point index
    spans = d // ds
    rs = np.indices(tuple(spans)).reshape(len(ds), -1).T
    chars = np.array(np.unravel_index(np.arange(nchar), tuple(ds))).T
    ext = chars[:, None, :] + ds * rs[None, :, :]  # (nchar, nexts, m)
    sub = _embedded_params(H)
    pts = digit_array(ext.reshape(-1, len(ds)), sub)
    point_idx = np.ravel_multi_index(tuple(pts.T), (sub.p,) * sub.nvars).reshape(nchar, -1)
    return b_index, nchar, point_idx


def _histogram_verdict(H, source, N, rng, sub: GroupParams):
    b_index, nchar, point_idx = _hist_tables(H)
    counts = rng.multinomial(N, source.probabilities())
    per_char = np.bincount(b_index, weights=counts, minlength=nchar).astype(np.int64)
    nexts = point_idx.shape[1]
    mask = np.zeros(sub.p ** sub.nvars, dtype=np.uint8)
    if nexts == 1:
        mask[point_idx[per_char > 0, 0]] = 1
    else:
        hit = np.flatnonzero(per_char)
        spread = rng.multinomial(per_char[hit], np.full(nexts, 1.0 / nexts))
        mask[point_idx[hit][spread > 0]] = 1
    return decide_point_set(mask, sub)


def _use_histogram(H: Subgroup, source: SampleSource, mode: str) -> bool:
    if mode == "histogram":
        return True
    if mode == "stream":
        return False
    sub = _embedded_params(H)
    return source.params.order <= HISTOGRAM_CAP and sub.p ** sub.nvars <= HISTOGRAM_CAP


def decision_on_subgroup(H: Subgroup, source: SampleSource, c=2, target_error: float = 1 / 3,
                         rng: Optional[np.random.Generator] = None, mode: str = "auto") -> SubgroupDecision:
    """Run the rank test on ``source`` restricted to ``H`` and embedded into ``Z_{d_1}^m``.

    ``c`` is the tolerance handed to the rank test; the descent passes twice the
    source tolerance to absorb the distortion of restriction.  The trivial
    subgroup is Uniform without sampling.
    """
    if H.is_trivial:
        return SubgroupDecision(Verdict.UNIFORM, 1, (), 0, 0, 0)
    if rng is None:
        rng = make_rng(source.seed, _CALL_STREAM_BASE)
    sub = _embedded_params(H)
    N = required_sample_size(sub, c, target_error)
    if _use_histogram(H, source, mode):
        verdict, rank, delta = _histogram_verdict(H, source, N, rng, sub)
        return SubgroupDecision(verdict, H.order, H.invariants, N, rank, delta)
    xs = draw(source, N, rng)
    ys = extension_array(restrict_array(xs, H), H.invariants, rng)
    res = decide(ys, sub, c, target_error)
    return SubgroupDecision(res.verdict, H.order, H.invariants, N, res.rank, res.delta)


def _describe(H: Subgroup) -> dict:
    return {"generators": [list(b.element) for b in H.basis], "order": H.order}


def search(source: SampleSource, c=None, target_error: float = 1 / 3,
           jobs: int = 1, mode: str = "auto") -> SearchResult:
    """Find a generator of ``<u>`` for a kernel-avoiding ``source``, or report a uniform one.

    ``c`` defaults to the tolerance the source declares.  The result and trace
    depend only on the source (and its seed), never on ``jobs``.
    """
    params = source.params
    c = as_fraction(source.tolerance if c is None else c)
    if c < 1:
        raise ValueError("tolerance c must be at least 1")
    amb = AbelianPGroup.from_params(params)
    A = amb.full()
    eps = target_error / subcall_bound(params)
    calls = 0

    def call(H, tol, level, idx):
        rng = make_rng(source.seed, _CALL_STREAM_BASE + level * (params.p + 2) + idx)
        return decision_on_subgroup(H, source, tol, eps, rng, mode)

    top = call(A, c, 0, 0)
    calls += 1
    trace = [{"level": 0, "subgroup": _describe(A), "tested": [dict(_describe(A), **top.to_json())]}]
    if top.verdict is Verdict.UNIFORM:
        return SearchResult(UNIFORM_SOURCE, None, 0, trace, calls)

    U = A
    depth = 0
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        while True:
            level = depth + 1
            if U.is_cyclic:
                cand = [U.maximal_cyclic()]
            else:
                cand = U.index_p_family()
            if pool is not None and len(cand) > 1:
                results = list(pool.map(lambda t: call(t[1], 2 * c, level, t[0]), enumerate(cand)))
            else:
                results = []
                for i, H in enumerate(cand):
                    results.append(call(H, 2 * c, level, i))
                    if results[-1].verdict is Verdict.AVOIDS_KERNEL:
                        break
            chosen = next((i for i, r in enumerate(results) if r.verdict is Verdict.AVOIDS_KERNEL), None)
            used = results if chosen is None else results[:chosen + 1]
            calls += len(used)
            trace.append({
                "level": level,
                "subgroup": _describe(U),
                "tested": [dict(_describe(H), **r.to_json()) for H, r in zip(cand, used)],
            })
            if chosen is None:
                if U.is_cyclic:
                    return SearchResult(GENERATOR, U.generator(), depth, trace, calls)
                raise InconsistencyError(
                    f"no index-{params.p} subgroup of a subgroup of order {U.order} avoids the kernel"
                )
            U = cand[chosen]
            depth += 1
            if U.is_trivial:
                raise PreconditionError("descent reached the trivial subgroup")
    finally:
        if pool is not None:
            pool.shutdown()
