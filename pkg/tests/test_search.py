import importlib
import itertools
import math
from fractions import Fraction

import pytest

from lindiseq import charsample as cs
from lindiseq.decision import Verdict
from lindiseq.errors import InconsistencyError, PreconditionError
from lindiseq.groups import AbelianPGroup, Subgroup
from lindiseq.ring import GroupParams, all_elements
from lindiseq.search import (
    cyclic_basis,
    decision_on_subgroup,
    index_p_subgroup_family,
    maximal_subgroup_cyclic,
    search,
)

# the package re-exports the function under the module's name
search_mod = importlib.import_module("lindiseq.search")


def same_cyclic(g, h, q):
    span = lambda v: {tuple(t * a % q for a in v) for t in range(q)}
    return span(g) == span(h)


def test_cyclic_basis_examples():
    G = AbelianPGroup(2, (2, 2))
    assert cyclic_basis(G.full()) == [((1, 0), 2), ((0, 1), 2)]
    assert cyclic_basis(Subgroup(G, ((1, 1), (0, 0)))) == [((1, 1), 2)]
    assert cyclic_basis(Subgroup(AbelianPGroup(2, (4,)), ((2,),))) == [((2,), 2)]


def test_family_wrappers():
    G = AbelianPGroup(3, (3, 3))
    assert len(index_p_subgroup_family(G.full())) == 4
    assert maximal_subgroup_cyclic(AbelianPGroup(3, (9,)).full()).order == 3
    with pytest.raises(PreconditionError):
        index_p_subgroup_family(AbelianPGroup(2, (8,)).full())


def test_decision_on_subgroup_examples():
    P = GroupParams(2, 1, 2)
    G = AbelianPGroup.from_params(P)
    src = cs.SampleSource.avoid_kernel(P, (1, 1), seed=0)
    assert decision_on_subgroup(Subgroup(G, ((1, 1),)), src).verdict is Verdict.AVOIDS_KERNEL
    wins = sum(
        decision_on_subgroup(Subgroup(G, ((1, 0),)), src.with_seed(s)).verdict is Verdict.UNIFORM for s in range(30)
    )
    assert wins >= 27
    assert decision_on_subgroup(G.trivial(), src).verdict is Verdict.UNIFORM


@pytest.mark.parametrize("mode", ["histogram", "stream"])
def test_decision_modes_agree_on_certain_cases(mode):
    P = GroupParams(2, 2, 2)
    G = AbelianPGroup.from_params(P)
    src = cs.SampleSource.avoid_kernel(P, (2, 0), c=2, tilt="adversarial", seed=5)
    for H in [G.full(), Subgroup(G, ((1, 0),)), Subgroup(G, ((2, 0), (0, 2)))]:
        assert decision_on_subgroup(H, src, 4, mode=mode).verdict is Verdict.AVOIDS_KERNEL


def test_search_examples():
    P = GroupParams(2, 1, 2)
    r = search(cs.SampleSource.avoid_kernel(P, (1, 1), seed=0))
    assert r.kind == "Generator" and r.generator == (1, 1)

    P4 = GroupParams(2, 2, 1)
    r = search(cs.SampleSource.avoid_kernel(P4, (2,), seed=0))
    assert r.generator == (2,)
    last = r.trace[-1]["tested"]
    before = r.trace[-2]["tested"]
    assert before[0]["generators"] == [[2]] and before[0]["verdict"] == "AvoidsKernel"
    assert last[0]["order"] == 1 and last[0]["verdict"] == "Uniform"

    hits = sum(search(cs.SampleSource.uniform(P, seed=s)).kind == "UniformSource" for s in range(30))
    assert hits >= 20


@pytest.mark.parametrize("pkn", [(2, 1, 3), (2, 2, 2), (3, 1, 2), (3, 2, 1), (5, 1, 2), (2, 3, 1)])
def test_search_recovers_cyclic_group(pkn):
    P = GroupParams(*pkn)
    amb = AbelianPGroup.from_params(P)
    for u in itertools.product(range(P.q), repeat=P.n):
        if not any(u):
            continue
        r = search(cs.SampleSource.avoid_kernel(P, u, seed=1))
        assert same_cyclic(r.generator, u, P.q)
        assert r.depth <= P.k * P.n
        # the subgroup chosen at each level contains u
        for level in r.trace[1:]:
            chosen = level["tested"][-1]
            if chosen["verdict"] == "AvoidsKernel":
                H = Subgroup(amb, tuple(tuple(g) for g in chosen["generators"]))
                assert H.contains(u)


def test_search_stream_mode():
    P = GroupParams(3, 1, 2)
    for u in [(1, 0), (1, 2), (2, 2)]:
        r = search(cs.SampleSource.avoid_kernel(P, u, c=2, tilt="adversarial", seed=3), mode="stream")
        assert same_cyclic(r.generator, u, 3)


def test_search_half_fourier_source():
    P = GroupParams(2, 2, 2)
    for u in [(1, 0), (2, 2), (1, 3)]:
        r = search(cs.SampleSource.half_fourier(P, u, seed=2))
        assert same_cyclic(r.generator, u, 4)


def test_search_independent_of_jobs():
    P = GroupParams(3, 1, 3)
    src = cs.SampleSource.avoid_kernel(P, (1, 2, 0), seed=8)
    a = search(src, jobs=1).to_json(with_trace=True)
    b = search(src, jobs=4).to_json(with_trace=True)
    assert a == b


def test_search_reports_inconsistency(monkeypatch):
    real = search_mod.decision_on_subgroup

    def lying(H, source, c=2, target_error=1 / 3, rng=None, mode="auto"):
        if H.order == H.ambient.order:
            return real(H, source, c, target_error, rng, mode)
        return search_mod.SubgroupDecision(Verdict.UNIFORM, H.order, H.invariants, 0, 0, 0)

    monkeypatch.setattr(search_mod, "decision_on_subgroup", lying)
    with pytest.raises(InconsistencyError):
        search(cs.SampleSource.avoid_kernel(GroupParams(2, 1, 2), (1, 1)))


def embedded_distribution(source, H):
    """Exact distribution of extend(restrict(x)) over Z_{d_1}^m."""
    P = source.params
    w = source.weights()
    ds = H.invariants
    d = ds[0]
    bs = cs.restrict_array(all_elements(P), H)
    per_char = {}
    for i, b in enumerate(map(tuple, bs)):
        per_char[b] = per_char.get(b, 0) + w[i]
    ext = math.prod(d // dj for dj in ds)
    out = {}
    for y in itertools.product(range(d), repeat=len(ds)):
        b = tuple(a % dj for a, dj in zip(y, ds))
        out[y] = per_char.get(b, Fraction(0)) / ext
    return out


def descent_subgroups(G):
    A = G.full()
    subs = [A]
    if not A.is_cyclic:
        subs += A.index_p_family()
    for x in G.elements():
        if any(x):
            subs.append(Subgroup(G, (x,)))
    return subs


@pytest.mark.parametrize("pkn", [(2, 1, 2), (2, 1, 3), (2, 2, 2), (3, 1, 2), (2, 3, 1), (3, 2, 1)])
def test_restricted_sources_stay_in_doubled_envelope(pkn):
    """Restricting then extending keeps the tolerance within 2c, exactly computed."""
    P = GroupParams(*pkn)
    G = AbelianPGroup.from_params(P)
    subs = descent_subgroups(G)
    for u in itertools.product(range(P.q), repeat=P.n):
        if not any(u):
            continue
        sources = [
            cs.SampleSource.avoid_kernel(P, u, 1),
            cs.SampleSource.avoid_kernel(P, u, 2, "adversarial"),
            cs.SampleSource.half_fourier(P, u),
        ]
        for src in sources:
            c2 = 2 * src.tolerance
            for H in subs:
                dist = embedded_distribution(src, H)
                ds = H.invariants
                coords = H.coordinates(u)
                if coords is None:
                    support = list(dist)
                else:
                    up = [a * (ds[0] // dj) for a, dj in zip(coords, ds)]
                    support = [y for y in dist if sum(a * b for a, b in zip(y, up)) % ds[0]]
                s = len(support)
                assert sum(dist.values()) == 1
                for y, pr in dist.items():
                    if y in support:
                        assert Fraction(1) / (c2 * s) <= pr <= c2 / s
                    else:
                        assert pr == 0
