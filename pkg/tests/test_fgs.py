import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasedecomp.bench import planted
from phasedecomp.bilinear import (
    BilinearDecomposition,
    conv_tensor,
    embed_tensor,
    field_tensor,
    recompose,
    standard_bilinear,
    verify_bilinear,
)
from phasedecomp.cpdecomp import (
    CpDecomposition,
    cubic_of,
    seven_list,
    standard_decomposition,
    verify,
)
from phasedecomp.fgs.bilinear import (
    bilinear_flip,
    bilinear_plus,
    bilinear_random_walk,
    bilinear_reduce,
    bilinear_search,
)
from phasedecomp.fgs.search import WalkParams, pool_search
from phasedecomp.fgs.symmetric import (
    best_decomposition,
    fgs_search,
    flip,
    immediate_reduce,
    plus,
    random_walk,
)
from phasedecomp.phasepoly import PhasePolynomial
from phasedecomp.sge import sge_pass_greedy

from oracles import bilinear_entries, cubic_part_of_terms
from strategies import THICK, decompositions

e1, e2, e3, e4, e5, e6 = 1, 2, 4, 8, 16, 32

SMALL = WalkParams(pool_size=20, walk_limit=20_000, plateau=500, sge_interval=1000, seed=0)


# ---------------------------------------------------------------------------
# Symmetric moves
# ---------------------------------------------------------------------------


def test_flip_example():
    d = CpDecomposition(5, ((e1, e2, e5), (e3, e4, e5)))
    out = flip(d, 0, 1, e5)
    assert out.rank == 2
    assert all(e5 in seven_list(*t) for t in out.terms)
    assert cubic_of(out) == cubic_of(d)
    expect = CpDecomposition(5, ((e1 ^ e3, e2, e5), (e3, e2 ^ e4, e5)))
    assert cubic_of(expect) == cubic_of(d)


def test_flip_twice_keeps_tensor():
    d = CpDecomposition(5, ((e1, e2, e5), (e3, e4, e5)))
    out = flip(flip(d, 0, 1, e5), 0, 1, e5)
    assert out.rank == 2 and cubic_of(out) == cubic_of(d)


def test_flip_dropping_dependent_child():
    # u1 + u2 = e2 = v1, so the first child degenerates.
    d = CpDecomposition(5, ((e1, e2, e5), (e1 ^ e2, e3, e5)))
    out = flip(d, 0, 1, e5)
    assert out.rank == 1 and cubic_of(out) == cubic_of(d)


def test_flip_requires_shared_z():
    d = CpDecomposition(5, ((e1, e2, e5), (e3, e4, e5)))
    with pytest.raises(ValueError):
        flip(d, 0, 1, e1)


def test_immediate_reduce_examples():
    twin = CpDecomposition(3, ((e1, e2, e3), (e1, e2, e3)))
    assert immediate_reduce(twin, 0, 1).rank == 0
    d = CpDecomposition(4, ((e1, e2, e3), (e1, e2, e4)))
    assert immediate_reduce(d, 0, 1).key() == CpDecomposition(4, ((e1, e2, e3 ^ e4),)).key()
    d = CpDecomposition(4, ((e1, e2, e3), (e1 ^ e2, e2, e4)))
    assert immediate_reduce(d, 0, 1).key() == CpDecomposition(4, ((e1, e2, e3 ^ e4),)).key()


def test_immediate_reduce_rejects_other_intersections():
    d = CpDecomposition(5, ((e1, e2, e5), (e3, e4, e5)))  # share only e5
    with pytest.raises(ValueError):
        immediate_reduce(d, 0, 1)


def test_plus_example():
    d = CpDecomposition(6, ((e1, e2, e3), (e4, e5, e6)))
    out = plus(d, 0, 1)
    expect = CpDecomposition(6, ((e1 ^ e4, e2, e3), (e4, e2 ^ e5, e6), (e4, e2, e3 ^ e6)))
    assert out.key() == expect.key()
    assert cubic_of(out) == cubic_of(d)
    # No single quadratic-form reduction undoes it; a flip followed by a
    # reduction does, which a short walk finds.
    assert sge_pass_greedy(out).rank == 3
    back, _ = random_walk(out, WalkParams(walk_limit=2000, plateau=10**6), random.Random(0))
    assert back is not None and back.rank == 2 and cubic_of(back) == cubic_of(d)


def test_plus_rejects_overlap():
    d = CpDecomposition(5, ((e1, e2, e5), (e3, e4, e5)))
    with pytest.raises(ValueError):
        plus(d, 0, 1)


@given(decompositions(max_n=10, max_rank=12), st.data())
def test_move_rank_deltas_and_invariance(d, data):
    if d.rank < 2:
        return
    q1, q2 = data.draw(st.lists(st.integers(0, d.rank - 1), min_size=2, max_size=2, unique=True))
    s1, s2 = set(seven_list(*d.terms[q1])), set(seven_list(*d.terms[q2]))
    common = s1 & s2
    c = cubic_of(d)
    if not common:
        out = plus(d, q1, q2)
        assert out.rank == d.rank + 1
    elif len(common) in (3, 7) and data.draw(st.booleans()):
        out = immediate_reduce(d, q1, q2)
        assert out.rank in (d.rank - 1, d.rank - 2)
    else:
        z = data.draw(st.sampled_from(sorted(common)))
        out = flip(d, q1, q2, z)
        assert out.rank <= d.rank
    assert cubic_of(out) == c
    if d.n <= 8:
        assert cubic_part_of_terms(out.terms, d.n) == c.C


# ---------------------------------------------------------------------------
# Walks and search
# ---------------------------------------------------------------------------


def test_walk_from_rank_one_fails():
    d = CpDecomposition(3, ((e1, e2, e3),))
    res, steps = random_walk(d, WalkParams(walk_limit=1000, plateau=10), random.Random(1))
    assert res is None and steps >= 1


def test_walk_returns_merges_found_at_start():
    # All three terms pairwise share a plane; indexing alone merges them to one.
    d = CpDecomposition(4, ((e1, e2, e4), (e1, e3, e4), (e2, e3, e4)))
    res, steps = random_walk(d, WalkParams(walk_limit=1000, plateau=10), random.Random(0))
    assert steps == 0 and res is not None and res.rank == 1 and verify(res, cubic_of(d))
    pool, _ = fgs_search(cubic_of(d), d, WalkParams(pool_size=5, walk_limit=1000, plateau=10))
    assert pool.rank == 1


def test_walk_reduces_thickness_example():
    sd = standard_decomposition(THICK)
    rng = random.Random(5)
    for _ in range(20):
        res, _ = random_walk(sd, SMALL, rng)
        if res is not None:
            break
    assert res is not None and res.rank <= 4 and verify(res, THICK)


def test_search_reaches_rank_three():
    pool, log = fgs_search(THICK, standard_decomposition(THICK), SMALL)
    assert pool.rank == 3
    assert all(verify(m, THICK) for m in pool.members)
    assert len({m.key() for m in pool.members}) == len(pool.members)
    assert [r for r, *_ in log.rows][0] == 5


def test_search_planted_from_sge():
    c, w = planted(8, 3, 11)
    start = sge_pass_greedy(standard_decomposition(c))
    pool, _ = fgs_search(c, start, SMALL)
    assert pool.rank <= 3
    assert verify(best_decomposition(pool), c)


def test_search_zero_tensor():
    zero = PhasePolynomial(4)
    pool, _ = fgs_search(zero, CpDecomposition(4), SMALL)
    assert pool.rank == 0 and pool.members[0].rank == 0


def test_search_embedded_gf4():
    c = embed_tensor(field_tensor(2))
    pool, _ = fgs_search(c, standard_decomposition(c), SMALL)
    assert pool.rank == 3


def test_search_errors():
    with pytest.raises(ValueError):
        fgs_search(THICK, CpDecomposition(6), SMALL)
    mixed = PhasePolynomial(3, L=frozenset({0}))
    with pytest.raises(ValueError):
        fgs_search(mixed, CpDecomposition(3), SMALL)


def test_search_is_deterministic():
    c, _ = planted(7, 4, 2)
    start = standard_decomposition(c)
    p = WalkParams(pool_size=10, walk_limit=5000, plateau=200, sge_interval=500, seed=9)
    a, la = fgs_search(c, start, p)
    b, lb = fgs_search(c, start, p)
    assert [m.key() for m in a.members] == [m.key() for m in b.members]
    assert [row[:3] for row in la.rows] == [row[:3] for row in lb.rows]


def test_walk_params_validation():
    with pytest.raises(ValueError):
        WalkParams(pool_size=0)
    with pytest.raises(ValueError):
        WalkParams(plateau=-1)
    p = WalkParams()
    assert (p.pool_size, p.walk_limit, p.plateau, p.sge_interval) == (1000, 10**6, 50_000, 10_000)


def test_pool_search_budget_stops():
    calls = []

    def walk(d, params, rng):
        calls.append(d)
        return None, 1

    pool, log = pool_search(7, walk, lambda d: d, lambda d: d, WalkParams(max_walks=5, min_pass=100))
    assert len(calls) == 5 and pool.rank == 7


def test_pool_search_descends_toy_chain():
    def walk(d, params, rng):
        return (d - 1, 1) if d > 3 and rng.random() < 0.5 else (None, 1)

    pool, log = pool_search(6, walk, lambda d: d, lambda d: d, WalkParams(pool_size=1, min_pass=20))
    assert pool.rank == 3
    assert [r for r, *_ in log.rows] == [6, 5, 4, 3, 3]


# ---------------------------------------------------------------------------
# Bilinear mode
# ---------------------------------------------------------------------------


def test_bilinear_reduce_merges():
    d = BilinearDecomposition((2, 2, 2), ((1, 1, 1), (1, 1, 2)))
    out = bilinear_reduce(d, 0, 1)
    assert out.terms == ((1, 1, 3),)
    assert bilinear_reduce(BilinearDecomposition((2, 2, 2), ((1, 1, 1), (1, 1, 1))), 0, 1).rank == 0
    with pytest.raises(ValueError):
        bilinear_reduce(BilinearDecomposition((2, 2, 2), ((1, 1, 1), (2, 2, 1))), 0, 1)


def test_bilinear_flip_and_plus_preserve_tensor():
    d = BilinearDecomposition((3, 3, 3), ((1, 1, 1), (1, 2, 4)))
    for swap in (False, True):
        out = bilinear_flip(d, 0, 1, 0, swap)
        assert out.rank <= 2 and recompose(out) == recompose(d)
    with pytest.raises(ValueError):
        bilinear_flip(d, 0, 1, 1)
    e = BilinearDecomposition((3, 3, 3), ((1, 1, 1), (2, 2, 2)))
    out = bilinear_plus(e, 0, 1)
    assert out.rank == 3 and recompose(out) == recompose(e)
    with pytest.raises(ValueError):
        bilinear_plus(d, 0, 1)


@st.composite
def bilinear_decomps(draw):
    dims = tuple(draw(st.integers(1, 5)) for _ in range(3))
    r = draw(st.integers(0, 10))
    terms = tuple(tuple(draw(st.integers(1, (1 << k) - 1)) for k in dims) for _ in range(r))
    return BilinearDecomposition(dims, terms)


@given(bilinear_decomps(), st.data())
def test_bilinear_moves_invariant(d, data):
    if d.rank < 2:
        return
    q1, q2 = data.draw(st.lists(st.integers(0, d.rank - 1), min_size=2, max_size=2, unique=True))
    t1, t2 = d.terms[q1], d.terms[q2]
    shared = [a for a in range(3) if t1[a] == t2[a]]
    ents = bilinear_entries(d.terms)
    if len(shared) >= 2:
        out = bilinear_reduce(d, q1, q2)
        assert out.rank < d.rank
    elif shared:
        out = bilinear_flip(d, q1, q2, shared[0], data.draw(st.booleans()))
        assert out.rank <= d.rank
    else:
        out = bilinear_plus(d, q1, q2)
        assert out.rank == d.rank + 1
    assert bilinear_entries(out.terms) == ents


def test_bilinear_conv_p2_reaches_three():
    t = conv_tensor(2)
    std = standard_bilinear(t)
    assert std.rank == 4
    pool, _ = bilinear_search(t, std, SMALL)
    assert pool.rank == 3 and all(verify_bilinear(m, t) for m in pool.members)


def test_bilinear_field_p3_reaches_six():
    t = field_tensor(3)
    pool, _ = bilinear_search(t, standard_bilinear(t), WalkParams(pool_size=50, walk_limit=50_000, plateau=50, seed=1))
    assert pool.rank == 6


def test_bilinear_walk_from_single_term():
    d = BilinearDecomposition((1, 1, 1), ((1, 1, 1),))
    res, _ = bilinear_random_walk(d, WalkParams(walk_limit=100, plateau=5), random.Random(0))
    assert res is None


def test_bilinear_walk_returns_merges_found_at_start():
    d = BilinearDecomposition((2, 1, 1), ((1, 1, 1), (2, 1, 1)))
    res, steps = bilinear_random_walk(d, WalkParams(walk_limit=100, plateau=5), random.Random(0))
    assert steps == 0 and res is not None and res.rank == 1
    assert recompose(res) == recompose(d)
