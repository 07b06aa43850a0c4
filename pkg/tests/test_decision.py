import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lindiseq import charsample as cs
from lindiseq.decision import (
    RankAccumulator,
    Verdict,
    count_monomials,
    decide,
    decide_point_set,
    eval_row,
    eval_rows,
    extract_witness,
    matrix_rank_mod_p,
    monomial_basis,
    required_sample_size,
)
from lindiseq.errors import CapacityError, DimensionError, InsufficientSamplesError
from lindiseq.polyenc import MultiPoly, evaluate, witness_poly
from lindiseq.ring import DigitVec, GroupParams, all_elements, delta_vec, digit_array


def naive_rank(rows, p):
    """Gaussian elimination on lists of Python ints."""
    M = [list(r) for r in rows]
    rank, cols = 0, len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(M)) if M[i][c] % p), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        M[rank] = [a * inv % p for a in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c] % p:
                f = M[i][c]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


def test_basis_examples():
    assert monomial_basis(GroupParams(2, 1, 2)).monomials == ((0, 0), (1, 0), (0, 1))
    assert monomial_basis(GroupParams(2, 1, 1)).monomials == ((0,), (1,))
    b = monomial_basis(GroupParams(3, 1, 2))
    assert b.monomials == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


@pytest.mark.parametrize("pkn", [(2, 1, 2), (2, 2, 3), (3, 1, 3), (2, 3, 2), (3, 2, 2), (5, 1, 2), (2, 1, 6)])
def test_basis_count_and_bound(pkn):
    P = GroupParams(*pkn)
    b = monomial_basis(P)
    D = P.effective_degree
    brute = sum(1 for e in itertools.product(range(P.p), repeat=P.nvars) if sum(e) <= D)
    assert b.delta == brute == count_monomials(P.p, P.nvars, D)
    assert len(set(b.monomials)) == b.delta
    assert b.delta <= math.comb(P.nvars + D, P.nvars)
    degrees = [sum(e) for e in b.monomials]
    assert degrees == sorted(degrees)


def test_basis_cap():
    with pytest.raises(CapacityError):
        monomial_basis(GroupParams(3, 2, 4), cap=100)


def test_eval_row_examples():
    b = monomial_basis(GroupParams(2, 1, 2))
    assert list(eval_row((1, 0), b)) == [1, 1, 0]
    b3 = monomial_basis(GroupParams(3, 1, 3))
    row = eval_row(DigitVec(3, (0, 0, 0)), b3)
    assert row[0] == 1 and not row[1:].any()
    with pytest.raises(DimensionError):
        eval_row((1, 0), b3)


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_row_dot_coefficients_is_evaluation(seed):
    rnd = np.random.default_rng(seed)
    P = GroupParams(3, 1, 3)
    b = monomial_basis(P)
    coeffs = rnd.integers(0, 3, size=b.delta)
    q = b.polynomial(coeffs)
    for a in itertools.product(range(3), repeat=3):
        assert int(eval_row(a, b) @ coeffs % 3) == evaluate(q, DigitVec(3, a))


def test_required_sample_size_examples():
    assert required_sample_size(GroupParams(2, 1, 2), 1) == 32
    assert required_sample_size(GroupParams(2, 1, 2), 2) == 64
    assert required_sample_size(GroupParams(3, 1, 1), 1) == 48
    P = GroupParams(2, 2, 3)
    assert required_sample_size(P, 3) == 3 * required_sample_size(P, 1)


@pytest.mark.parametrize("pkn", [(2, 1, 6), (2, 2, 3), (3, 1, 3), (5, 1, 2)])
def test_required_sample_size_closed_form(pkn):
    P = GroupParams(*pkn)
    d = monomial_basis(P).delta
    D = P.effective_degree
    for eps in (1 / 3, 0.01):
        expect = math.ceil((2 * d + 10 * math.log(1 / eps) / math.log(3)) * P.p ** math.ceil(D / (P.p - 1)) - 1e-9)
        assert required_sample_size(P, 1, eps) == expect


def test_required_sample_size_validation():
    with pytest.raises(ValueError):
        required_sample_size(GroupParams(2, 1, 2), 0.5)
    with pytest.raises(ValueError):
        required_sample_size(GroupParams(2, 1, 2), 1, 1.0)


def test_decide_examples(z2sq):
    res = decide([(1, 0), (0, 1)] * 16, z2sq)
    assert res.verdict is Verdict.AVOIDS_KERNEL and res.rank == 2 and res.delta == 3
    w = extract_witness(res.accumulator, res.basis)
    x1, x2 = MultiPoly.variable(2, 2, 0), MultiPoly.variable(2, 2, 1)
    assert w == x1 + x2 + 1

    res = decide([(0, 0), (1, 0), (0, 1)] + [(1, 1)] * 29, z2sq)
    assert res.verdict is Verdict.UNIFORM and res.rank == 3 and res.rows_consumed == 3
    assert extract_witness(res.accumulator, res.basis) is None

    P1 = GroupParams(2, 1, 1)
    res = decide([(0,), (1,)] * 16, P1)
    assert res.verdict is Verdict.UNIFORM and res.rank == 2


def test_decide_json_shape(z2sq):
    out = decide([(0, 0), (1, 0), (0, 1)] * 11, z2sq).to_json()
    assert out == {"verdict": "Uniform", "rank": 3, "delta": 3, "rows_consumed": 3}


def test_decide_refuses_short_input(z2sq):
    with pytest.raises(InsufficientSamplesError) as info:
        decide([(0, 0)] * 31, z2sq)
    assert info.value.required == 32


def test_decide_rejects_bad_rows(z2sq):
    with pytest.raises(ValueError):
        decide([(2, 0)] * 40, z2sq)
    with pytest.raises(DimensionError):
        decide([(0, 0, 0)] * 40, z2sq)


@pytest.mark.parametrize("pkn", [(2, 2, 2), (3, 1, 2), (2, 1, 4)])
def test_witness_always_vanishes(pkn):
    P = GroupParams(*pkn)
    for seed in range(5):
        xs = cs.sample(cs.SampleSource.avoid_kernel(P, (1,) + (0,) * (P.n - 1), seed=seed), required_sample_size(P))
        res = decide(xs, P)
        w = extract_witness(res.accumulator, res.basis)
        assert res.verdict is Verdict.AVOIDS_KERNEL and w is not None and not w.is_zero()
        assert all(evaluate(w, delta_vec(P.vec(x))) == 0 for x in xs[: res.rows_consumed])


def test_witness_polynomial_lies_in_vanishing_space():
    P = GroupParams(2, 2, 2)
    u = P.vec((1, 3))
    b = monomial_basis(P)
    coeffs = b.coefficients(witness_poly(u))
    xs = cs.sample(cs.SampleSource.avoid_kernel(P, u.coords, seed=2), 500)
    rows = eval_rows(digit_array(xs, P), b)
    assert not (rows @ coeffs % 2).any()


def test_accumulator_monotone_and_matches_batch():
    rng = np.random.default_rng(1)
    for p, width in [(2, 12), (3, 8), (5, 6)]:
        acc = RankAccumulator(p, width)
        rows = rng.integers(0, p, size=(20, width))
        rows[5] = (rows[1] + 2 * rows[2]) % p
        last = 0
        for i, r in enumerate(rows):
            acc.add(r)
            assert acc.rank >= last
            last = acc.rank
            assert acc.rank == naive_rank(rows[: i + 1].tolist(), p) == matrix_rank_mod_p(rows[: i + 1], p)
        v = acc.kernel_vector()
        if v is not None:
            assert not (rows @ v % p).any()


def test_rank_is_order_independent():
    P = GroupParams(3, 1, 3)
    b = monomial_basis(P)
    xs = cs.sample(cs.SampleSource.uniform(P, seed=9), 15)
    rows = eval_rows(digit_array(xs, P), b)
    ranks = set()
    for perm in itertools.islice(itertools.permutations(range(len(rows))), 0, 200, 37):
        acc = RankAccumulator(3, b.delta)
        for i in perm:
            acc.add(rows[i])
        ranks.add(acc.rank)
    assert len(ranks) == 1


def test_decide_jobs_independent():
    P = GroupParams(2, 2, 3)
    xs = cs.sample(cs.SampleSource.uniform(P, seed=4), required_sample_size(P))
    a = decide(xs, P, jobs=1, chunk=64).to_json()
    b = decide(xs, P, jobs=4, chunk=64).to_json()
    assert a == b


def test_point_set_verdict_agrees_with_stream():
    P = GroupParams(3, 1, 2)
    for seed in range(10):
        src = cs.SampleSource.uniform(P, seed=seed) if seed % 2 else cs.SampleSource.avoid_kernel(P, (1, 1), seed=seed)
        xs = cs.sample(src, required_sample_size(P))
        res = decide(xs, P)
        pts = digit_array(xs, P)
        mask = np.zeros(3 ** P.nvars, dtype=np.uint8)
        mask[np.ravel_multi_index(tuple(pts.T), (3,) * P.nvars)] = 1
        verdict, rank, delta = decide_point_set(mask, P)
        assert verdict is res.verdict and delta == res.delta
        if res.verdict is Verdict.AVOIDS_KERNEL:
            assert rank == res.rank


@pytest.mark.parametrize("pkn", [(2, 1, 3), (3, 1, 2), (2, 2, 2)])
def test_rank_drop_probability_bound(pkn):
    """Along a sample run, while the rank is not full a uniform row escapes the span often enough."""
    P = GroupParams(*pkn)
    b = monomial_basis(P)
    floor = P.p ** -math.ceil(P.effective_degree / (P.p - 1))
    pts = digit_array(all_elements(P), P)
    all_rows = eval_rows(pts, b)
    for seed in range(3):
        acc = RankAccumulator(P.p, b.delta)
        xs = cs.sample(cs.SampleSource.uniform(P, seed=seed), 4 * b.delta)
        for row in eval_rows(digit_array(xs, P), b):
            if acc.full:
                break
            outside = sum(1 for r in all_rows if acc.reduce(r).any())
            assert outside / len(all_rows) >= floor
            acc.add(row)
