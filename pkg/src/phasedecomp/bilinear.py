"""Multiplication in GF(2^p) as a bilinear tensor.

The convolution tensor multiplies coefficient vectors of two polynomials of
degree < p; composing with reduction modulo an irreducible h gives the field
tensor.  Bilinear decompositions embed into cubic phase polynomials on three
disjoint variable blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from . import f2core
from .cpdecomp import CpDecomposition
from .f2core import iter_bits
from .phasepoly import PhasePolynomial

Entry = tuple[int, int, int]
BTerm = tuple[int, int, int]


@dataclass(frozen=True)
class BinaryPolynomial:
    """Polynomial over GF(2); bit t is the coefficient of x^t."""

    bits: int

    def __post_init__(self):
        if self.bits < 0:
            raise ValueError("negative coefficient mask")

    @property
    def degree(self) -> int:
        return self.bits.bit_length() - 1

    @classmethod
    def from_exponents(cls, *exps: int) -> "BinaryPolynomial":
        bits = 0
        for e in exps:
            bits ^= 1 << e
        return cls(bits)

    def __str__(self) -> str:
        if not self.bits:
            return "0"
        parts = []
        for e in sorted(iter_bits(self.bits), reverse=True):
            parts.append("1" if e == 0 else "x" if e == 1 else f"x^{e}")
        return "+".join(parts)


@dataclass(frozen=True)
class BilinearTensor:
    dims: tuple[int, int, int]
    entries: frozenset[Entry] = frozenset()

    def __post_init__(self):
        if len(self.dims) != 3 or min(self.dims) < 0:
            raise ValueError("dims must be three non-negative sizes")
        ents = frozenset(tuple(e) for e in self.entries)
        for e in ents:
            if len(e) != 3 or not all(0 <= x < d for x, d in zip(e, self.dims)):
                raise ValueError(f"entry {e} outside dims {self.dims}")
        object.__setattr__(self, "entries", ents)

    def slices(self) -> dict[int, set[tuple[int, int]]]:
        """Entries grouped by the third index."""
        out: dict[int, set[tuple[int, int]]] = {}
        for i, j, k in self.entries:
            out.setdefault(k, set()).add((i, j))
        return out


@dataclass(frozen=True)
class BilinearDecomposition:
    dims: tuple[int, int, int]
    terms: tuple[BTerm, ...] = ()

    def __post_init__(self):
        terms = tuple(tuple(t) for t in self.terms)
        for t in terms:
            if len(t) != 3:
                raise ValueError("terms are triples")
            for x, d in zip(t, self.dims):
                if x == 0:
                    raise ValueError("zero factor in a bilinear term")
                if x < 0 or x >> d:
                    raise ValueError(f"factor exceeds dimension {d}")
        object.__setattr__(self, "terms", terms)

    @property
    def rank(self) -> int:
        return len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def key(self) -> tuple:
        return (self.dims, tuple(sorted(self.terms)))


def recompose(d: BilinearDecomposition) -> BilinearTensor:
    ents: set[Entry] = set()
    for u, v, w in d.terms:
        ents.symmetric_difference_update(product(iter_bits(u), iter_bits(v), iter_bits(w)))
    return BilinearTensor(d.dims, frozenset(ents))


def verify_bilinear(d: BilinearDecomposition, t: BilinearTensor) -> bool:
    if tuple(d.dims) != tuple(t.dims):
        raise ValueError("dimension mismatch")
    return recompose(d).entries == t.entries


def standard_bilinear(t: BilinearTensor) -> BilinearDecomposition:
    return BilinearDecomposition(
        t.dims, tuple((1 << i, 1 << j, 1 << k) for i, j, k in sorted(t.entries))
    )


# ---------------------------------------------------------------------------
# Polynomial arithmetic
# ---------------------------------------------------------------------------


def poly_mod(a: int, h: int) -> int:
    dh = h.bit_length() - 1
    while a and a.bit_length() - 1 >= dh:
        a ^= h << (a.bit_length() - 1 - dh)
    return a


def poly_mulmod(a: int, b: int, h: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> (h.bit_length() - 1):
            a ^= h
    return poly_mod(out, h)


def _poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def _prime_factors(p: int) -> list[int]:
    out, k = [], 2
    while k * k <= p:
        if p % k == 0:
            out.append(k)
            while p % k == 0:
                p //= k
        k += 1
    if p > 1:
        out.append(p)
    return out


def is_irreducible(h: BinaryPolynomial) -> bool:
    """Rabin's test: x^(2^p) = x mod h and gcd(x^(2^(p/q)) - x, h) = 1."""
    p = h.degree
    if p < 1:
        return False
    if p == 1:
        return True
    hb = h.bits

    def frob(k: int) -> int:
        y = 0b10
        for _ in range(k):
            y = poly_mulmod(y, y, hb)
        return y

    if frob(p) != 0b10:
        return False
    for q in _prime_factors(p):
        if _poly_gcd(hb, frob(p // q) ^ 0b10) != 1:
            return False
    return True


def irreducible_poly(p: int) -> BinaryPolynomial:
    """Irreducible monic polynomial of degree p with the smallest coefficient integer."""
    if not 1 <= p <= 32:
        raise ValueError("degree must lie in [1, 32]")
    for low in range(1 << p):
        h = BinaryPolynomial((1 << p) | low)
        if is_irreducible(h):
            return h
    raise AssertionError("every degree has an irreducible polynomial")


# ---------------------------------------------------------------------------
# Tensors
# ---------------------------------------------------------------------------


def conv_tensor(p: int) -> BilinearTensor:
    if p < 1:
        raise ValueError("p must be positive")
    return BilinearTensor(
        (p, p, 2 * p - 1), frozenset((i, j, i + j) for i in range(p) for j in range(p))
    )


def reduction_matrix(h: BinaryPolynomial, p: int | None = None) -> f2core.F2Matrix:
    """p x (2p-1) matrix whose column l is x^l mod h."""
    deg = h.degree
    if p is not None and p != deg:
        raise ValueError(f"modulus degree {deg} does not match p={p}")
    if not is_irreducible(h):
        raise ValueError(f"{h} is reducible")
    cols = [poly_mod(1 << l, h.bits) for l in range(2 * deg - 1)]
    rows = tuple(
        sum(1 << l for l, c in enumerate(cols) if (c >> k) & 1) for k in range(deg)
    )
    return f2core.F2Matrix(2 * deg - 1, rows)


def field_tensor(p: int, h: BinaryPolynomial | None = None) -> BilinearTensor:
    h = irreducible_poly(p) if h is None else h
    r = reduction_matrix(h, p)
    rows = list(r.rows)
    ents: set[Entry] = set()
    for i in range(p):
        for j in range(p):
            col = f2core.mat_vec(rows, 1 << (i + j))
            for k in iter_bits(col):
                ents ^= {(i, j, k)}
    return BilinearTensor((p, p, p), frozenset(ents))


def project(d: BilinearDecomposition, r: f2core.F2Matrix) -> BilinearDecomposition:
    """Map every third factor through r, dropping terms that vanish."""
    if d.dims[2] != r.ncols:
        raise ValueError("reduction matrix does not match the output dimension")
    rows = list(r.rows)
    terms = []
    for u, v, w in d.terms:
        w2 = f2core.mat_vec(rows, w)
        if w2:
            terms.append((u, v, w2))
    return BilinearDecomposition((d.dims[0], d.dims[1], len(rows)), tuple(terms))


def embed_tensor(t: BilinearTensor) -> PhasePolynomial:
    na, nb, nc = t.dims
    return PhasePolynomial(
        na + nb + nc, C=frozenset((i, na + j, na + nb + k) for i, j, k in t.entries)
    )


def embed(d: BilinearDecomposition, p: int | None = None) -> CpDecomposition:
    """Place the three factors on disjoint blocks [0,p), [p,2p), [2p,3p)."""
    na, nb, nc = d.dims
    if p is not None and (na, nb, nc) != (p, p, p):
        raise ValueError(f"expected dims ({p}, {p}, {p}), got {d.dims}")
    if p is None and not na == nb == nc:
        raise ValueError("embedding needs cubic dims")
    return CpDecomposition(
        na + nb + nc, tuple((u, v << na, w << (na + nb)) for u, v, w in d.terms)
    )


def embed_general(d: BilinearDecomposition) -> CpDecomposition:
    """Block embedding for arbitrary dims (na, nb, nc)."""
    na, nb, _ = d.dims
    return CpDecomposition(
        sum(d.dims), tuple((u, v << na, w << (na + nb)) for u, v, w in d.terms)
    )


# ---------------------------------------------------------------------------
# Karatsuba reference constructor
# ---------------------------------------------------------------------------


def _shift_terms(terms, sa: int, sb: int, sc: int):
    return [(u << sa, v << sb, w << sc) for u, v, w in terms]


def _karatsuba_terms(p: int) -> list[BTerm]:
    if p == 1:
        return [(1, 1, 1)]
    if p == 2:
        # a0b0 (1 + x), a1b1 (x + x^2), (a0+a1)(b0+b1) x
        return [(0b01, 0b01, 0b011), (0b10, 0b10, 0b110), (0b11, 0b11, 0b010)]
    if p == 3:
        # Six products: a_i b_i and (a_i + a_j)(b_i + b_j).
        out: list[BTerm] = []
        pairs = {}
        for i in range(3):
            for j in range(i + 1, 3):
                pairs[(i, j)] = 1 << (i + j)
        diag = [0, 0, 0]
        for i in range(3):
            diag[i] ^= 1 << (2 * i)
        # a_i b_j + a_j b_i = (a_i+a_j)(b_i+b_j) + a_i b_i + a_j b_j
        for (i, j), mono in pairs.items():
            out.append(((1 << i) | (1 << j), (1 << i) | (1 << j), mono))
            diag[i] ^= mono
            diag[j] ^= mono
        for i in range(3):
            out.append((1 << i, 1 << i, diag[i]))
        return out
    m = (p + 1) // 2
    lo = _karatsuba_terms(m)
    hi = _karatsuba_terms(p - m)
    out = []
    # A = A0 + x^m A1, B = B0 + x^m B1 with A0, B0 of length m.
    # AB = A0B0 (1 + x^m) + (A0+A1)(B0+B1) x^m + A1B1 (x^m + x^2m)
    for u, v, w in lo:
        out.append((u, v, w ^ (w << m)))
    for u, v, w in hi:
        out.append((u << m, v << m, (w << m) ^ (w << (2 * m))))
    for u, v, w in lo:
        # (A0 + A1) is indexed on the low block, A1 padded if shorter.
        uu = u | ((u & ((1 << (p - m)) - 1)) << m)
        vv = v | ((v & ((1 << (p - m)) - 1)) << m)
        out.append((uu & ((1 << p) - 1), vv & ((1 << p) - 1), w << m))
    return out


def karatsuba(p: int) -> BilinearDecomposition:
    """Recursive Karatsuba scheme for the convolution tensor; duplicates cancel."""
    if p < 1:
        raise ValueError("p must be positive")
    counts: dict[BTerm, int] = {}
    for t in _karatsuba_terms(p):
        counts[t] = counts.get(t, 0) ^ 1
    terms = tuple(t for t, c in counts.items() if c)
    return BilinearDecomposition((p, p, 2 * p - 1), terms)
