import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasedecomp import f2core
from phasedecomp.cpdecomp import (
    CpDecomposition,
    canonical_term,
    cubic_of,
    representative_with,
    seven_set,
    split,
    split_cascade,
    standard_decomposition,
    trivector,
    verify,
)
from phasedecomp.phasepoly import PhasePolynomial
from phasedecomp.sge import reduce_over

from oracles import cubic_part_of_terms, span_set
from strategies import THICK, THICK_C, THICK_RANK3, decompositions, independent_triple

e1, e2, e3, e4, e5 = 1, 2, 4, 8, 16


def cubic(n, C):
    return PhasePolynomial(n, C=frozenset(C))


# ---------------------------------------------------------------------------
# Seven-sets and representatives
# ---------------------------------------------------------------------------


def test_seven_set_examples():
    full = frozenset(range(1, 8))
    assert seven_set((e1, e2, e3)) == full
    assert seven_set((e1, e2, e1 ^ e2 ^ e3)) == full
    s = seven_set((e1 ^ e4, e2, e3))
    assert len(s) == 7 and s | {0} == span_set([e1 ^ e4, e2, e3])


@pytest.mark.parametrize("z", [e1 ^ e2, e3, e1 ^ e2 ^ e3])
def test_representative_with_examples(z):
    a, b, c = representative_with((e1, e2, e3), z)
    assert c == z and span_set([a, b, c]) == span_set([e1, e2, e3])


def test_representative_with_rejects_outside():
    with pytest.raises(ValueError):
        representative_with((e1, e2, e3), e4)


@given(st.integers(3, 8).flatmap(lambda n: st.tuples(st.just(n), independent_triple(n))), st.data())
def test_representative_preserves_span_and_cubic(nt, data):
    n, t = nt
    z = data.draw(st.sampled_from(sorted(seven_set(t))))
    rep = representative_with(t, z)
    assert rep[2] == z
    assert canonical_term(*rep) == canonical_term(*t)
    assert cubic_part_of_terms([rep], n) == cubic_part_of_terms([t], n)


# ---------------------------------------------------------------------------
# cubic_of and verify
# ---------------------------------------------------------------------------


def test_cubic_of_examples():
    one = CpDecomposition(3, ((e1, e2, e3),))
    assert cubic_of(one).C == {(0, 1, 2)}
    assert cubic_of(CpDecomposition(3, ((e1, e2, e3), (e1, e2, e3)))).C == frozenset()
    assert cubic_of(THICK_RANK3).C == THICK_C


def test_verify_examples():
    assert verify(THICK_RANK3, THICK)
    assert verify(CpDecomposition(4), cubic(4, ()))
    assert not verify(CpDecomposition(4, ((e1, e2, e3),)), cubic(4, {(0, 1, 3)}))
    with pytest.raises(ValueError):
        verify(CpDecomposition(4), cubic(5, ()))


@given(decompositions(max_n=8, max_rank=6))
def test_cubic_of_matches_truth_table(d):
    assert cubic_of(d).C == cubic_part_of_terms(d.terms, d.n)


@given(st.integers(3, 7).flatmap(lambda n: st.tuples(st.just(n), independent_triple(n))))
def test_trivector_is_order_free(nt):
    n, (u, v, w) = nt
    ref = trivector(u, v, w)
    for perm in ((v, u, w), (w, v, u), (u, w, v)):
        assert trivector(*perm) == ref
    assert ref == cubic_part_of_terms([(u, v, w)], n)


def test_dependent_terms_rejected():
    with pytest.raises(ValueError):
        CpDecomposition(3, ((e1, e2, e1 ^ e2),))
    with pytest.raises(ValueError):
        CpDecomposition(2, ((e1, e2, e3),))


def test_key_is_order_free():
    a = CpDecomposition(4, ((e1, e2, e3), (e2, e3, e4)))
    b = CpDecomposition(4, ((e3, e4, e2), (e3, e1, e2)))
    assert a.key() == b.key()


# ---------------------------------------------------------------------------
# Standard decomposition and splits
# ---------------------------------------------------------------------------


def test_standard_decomposition_examples():
    assert standard_decomposition(cubic(3, {(0, 1, 2)})).terms == ((e1, e2, e3),)
    assert standard_decomposition(cubic(3, ())).rank == 0
    sd = standard_decomposition(THICK)
    assert sd.rank == 5 and verify(sd, THICK)
    assert all(all(f2core.popcount(x) == 1 for x in t) for t in sd.terms)


def test_split_examples():
    d = CpDecomposition(4, ((e1, e2, e3),))
    expect = CpDecomposition(4, ((e1, e2, e4), (e1, e2, e3 ^ e4))).key()
    assert split(d, 0, e4).key() == expect
    assert split(d, 0, e3 ^ e4).key() == expect


def test_split_then_reduce_recovers():
    d = CpDecomposition(4, ((e1, e2, e3),))
    s = split(d, 0, e4)
    assert s.rank == 2
    # Both children share the plane (e1, e2); reduce over e1.
    assert reduce_over(s, e1).key() == d.key()


def test_split_errors():
    d = CpDecomposition(4, ((e1, e2, e3),))
    with pytest.raises(ValueError):
        split(d, 0, 0)
    # w' inside the (u, v) plane leaves a single child equal to the parent span.
    assert split(d, 0, e1).key() == d.key()


@given(decompositions(max_n=8, max_rank=6), st.data())
def test_split_preserves_cubic(d, data):
    if d.rank == 0:
        return
    q = data.draw(st.integers(0, d.rank - 1))
    w = data.draw(st.integers(1, (1 << d.n) - 1))
    try:
        s = split(d, q, w)
    except ValueError:
        return
    assert cubic_of(s) == cubic_of(d)


@given(decompositions(max_n=6, max_rank=5))
def test_split_cascade_reaches_standard(d):
    assert split_cascade(d).key() == standard_decomposition(cubic_of(d)).key()
