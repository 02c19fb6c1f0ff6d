import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasedecomp import f2core
from phasedecomp.bilinear import (
    BilinearDecomposition,
    BilinearTensor,
    BinaryPolynomial,
    conv_tensor,
    embed,
    embed_general,
    embed_tensor,
    field_tensor,
    irreducible_poly,
    is_irreducible,
    karatsuba,
    poly_mulmod,
    project,
    recompose,
    reduction_matrix,
    standard_bilinear,
    verify_bilinear,
)
from phasedecomp.cpdecomp import cubic_of, verify
from phasedecomp.fgs.bilinear import bilinear_reduce_pass, slice_reduce

from oracles import bilinear_entries

X2_X_1 = BinaryPolynomial(0b111)
X3_X_1 = BinaryPolynomial(0b1011)


def columns(r, ncols):
    """Column l of an F2Matrix as an int over its rows."""
    return [sum(((row >> l) & 1) << k for k, row in enumerate(r.rows)) for l in range(ncols)]


# ---------------------------------------------------------------------------
# Polynomials and reduction
# ---------------------------------------------------------------------------


def brute_irreducible(bits: int) -> bool:
    """Trial division by every polynomial of degree 1 .. deg/2."""
    deg = bits.bit_length() - 1
    for q in range(2, 1 << (deg // 2 + 1)):
        a = bits
        qd = q.bit_length() - 1
        while a and a.bit_length() - 1 >= qd:
            a ^= q << (a.bit_length() - 1 - qd)
        if a == 0:
            return False
    return deg >= 1


def test_irreducible_poly_examples():
    assert irreducible_poly(2) == X2_X_1
    assert irreducible_poly(3) == X3_X_1
    assert irreducible_poly(4) == BinaryPolynomial.from_exponents(4, 1, 0)
    assert str(irreducible_poly(4)) == "x^4+x+1"


@pytest.mark.parametrize("p", range(1, 11))
def test_irreducible_poly_is_smallest(p):
    h = irreducible_poly(p)
    assert h.degree == p and brute_irreducible(h.bits)
    smaller = [b for b in range(1 << p, h.bits) if brute_irreducible(b)]
    assert smaller == []


@given(st.integers(2, 1 << 11))
def test_is_irreducible_matches_trial_division(bits):
    assert is_irreducible(BinaryPolynomial(bits)) == brute_irreducible(bits)


def test_irreducible_poly_large_degrees():
    for p in (16, 31, 32):
        h = irreducible_poly(p)
        assert h.degree == p and is_irreducible(h)


def test_reduction_matrix_examples():
    assert columns(reduction_matrix(X2_X_1), 3) == [0b01, 0b10, 0b11]
    assert columns(reduction_matrix(X3_X_1), 5)[3] == 0b011
    for p in range(1, 7):
        cols = columns(reduction_matrix(irreducible_poly(p)), 2 * p - 1)
        assert cols[:p] == [1 << l for l in range(p)]


def test_reduction_matrix_errors():
    with pytest.raises(ValueError):
        reduction_matrix(BinaryPolynomial(0b101))  # x^2 + 1 = (x + 1)^2
    with pytest.raises(ValueError):
        reduction_matrix(X2_X_1, 3)


@given(st.integers(2, 6).flatmap(lambda p: st.tuples(st.just(p), st.integers(0, (1 << p) - 1), st.integers(0, (1 << p) - 1))))
def test_field_tensor_is_field_multiplication(case):
    p, a, b = case
    h = irreducible_poly(p)
    t = field_tensor(p, h)
    c = 0
    for i, j, k in t.entries:
        if a >> i & 1 and b >> j & 1:
            c ^= 1 << k
    assert c == poly_mulmod(a, b, h.bits)


# ---------------------------------------------------------------------------
# Tensors
# ---------------------------------------------------------------------------


def test_conv_tensor_examples():
    assert conv_tensor(1).entries == {(0, 0, 0)}
    assert conv_tensor(2).entries == {(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 2)}
    t = conv_tensor(3)
    assert len(t.entries) == 9 and {k for *_, k in t.entries} == set(range(5))
    with pytest.raises(ValueError):
        conv_tensor(0)


def test_field_tensor_examples():
    t = field_tensor(2, X2_X_1)
    assert t.slices() == {0: {(0, 0), (1, 1)}, 1: {(0, 1), (1, 0), (1, 1)}}
    assert field_tensor(1).entries == {(0, 0, 0)}


def test_karatsuba_ranks_and_verify():
    expect = {1: 1, 2: 3, 3: 6, 4: 9, 5: 15, 6: 18, 7: 24, 8: 27}
    for p, r in expect.items():
        k = karatsuba(p)
        assert k.rank == r
        assert bilinear_entries(k.terms) == conv_tensor(p).entries


def test_projection_examples():
    r = reduction_matrix(X2_X_1)
    std = standard_bilinear(conv_tensor(2))
    assert std.rank == 4 and verify_bilinear(project(std, r), field_tensor(2))
    k = project(karatsuba(2), r)
    assert k.rank <= 3 and verify_bilinear(k, field_tensor(2))
    zero = f2core.F2Matrix(3, (0, 0))
    z = project(std, zero)
    assert z.rank == 0 and recompose(z).entries == frozenset()
    with pytest.raises(ValueError):
        project(standard_bilinear(field_tensor(2)), r)


@st.composite
def conv_decomps(draw):
    p = draw(st.integers(2, 5))
    r = draw(st.integers(0, 8))
    dims = (p, p, 2 * p - 1)
    terms = tuple(tuple(draw(st.integers(1, (1 << k) - 1)) for k in dims) for _ in range(r))
    return p, BilinearDecomposition(dims, terms)


@given(conv_decomps())
def test_projection_commutes_with_recompose(case):
    p, d = case
    r = reduction_matrix(irreducible_poly(p))
    rows = list(r.rows)
    expect = set()
    for i, j, l in recompose(d).entries:
        for k in f2core.iter_bits(f2core.mat_vec(rows, 1 << l)):
            expect ^= {(i, j, k)}
    assert recompose(project(d, r)).entries == expect


def test_field_rank_at_most_conv_rank():
    for p in range(1, 7):
        proj = project(karatsuba(p), reduction_matrix(irreducible_poly(p)))
        assert verify_bilinear(proj, field_tensor(p)) and proj.rank <= karatsuba(p).rank


# ---------------------------------------------------------------------------
# Embedding
# ---------------------------------------------------------------------------


def test_embed_examples():
    one = BilinearDecomposition((1, 1, 1), ((1, 1, 1),))
    assert embed(one, 1).terms == ((1, 2, 4),)
    d = project(karatsuba(2), reduction_matrix(X2_X_1))
    e = embed(d, 2)
    assert e.n == 6 and e.rank == 3
    assert verify(e, embed_tensor(field_tensor(2)))
    with pytest.raises(ValueError):
        embed(karatsuba(2))


@given(conv_decomps())
def test_embedding_matches_entries(case):
    p, d = case
    e = embed_general(d)
    na, nb, _ = d.dims
    expect = {(i, na + j, na + nb + k) for i, j, k in recompose(d).entries}
    assert cubic_of(e).C == expect
    assert embed_tensor(recompose(d)).C == expect


# ---------------------------------------------------------------------------
# Types and slice reductions
# ---------------------------------------------------------------------------


def test_type_validation():
    with pytest.raises(ValueError):
        BilinearDecomposition((2, 2, 2), ((0, 1, 1),))
    with pytest.raises(ValueError):
        BilinearDecomposition((2, 2, 2), ((4, 1, 1),))
    with pytest.raises(ValueError):
        BilinearTensor((2, 2, 2), frozenset({(2, 0, 0)}))
    assert BinaryPolynomial.from_exponents(2, 0).degree == 2


def test_slice_reduce_combines_dependent_factors():
    # a b1 c1 + a b2 c2 + a (b1 + b2) c3 needs only two terms.
    d = BilinearDecomposition((2, 3, 3), ((1, 1, 1), (1, 2, 2), (1, 3, 4)))
    out = slice_reduce(d, 0, 1)
    assert out.rank == 2 and recompose(out) == recompose(d)
    assert bilinear_reduce_pass(d).rank == 2


@given(conv_decomps(), st.integers(0, 2))
def test_reduce_pass_preserves_tensor(case, axis):
    _, d = case
    out = bilinear_reduce_pass(d)
    assert out.rank <= d.rank and recompose(out) == recompose(d)
    if d.rank:
        a = d.terms[0][axis]
        assert recompose(slice_reduce(d, axis, a)) == recompose(d)
