"""CP decompositions of cubic phase polynomials over GF(2).

A rank-1 term (u, v, w) contributes (u.x)(v.x)(w.x) to f3; only its
3-dimensional span matters (GL(3,2) symmetry), so terms are stored in a
canonical form: the RREF basis of the span.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from . import f2core
from .f2core import iter_bits, rref_basis
from .phasepoly import CubicTensor, PhasePolynomial

Term = tuple[int, int, int]


def canonical_term(u: int, v: int, w: int) -> Term:
    """RREF basis of span{u, v, w}; raises if the triple is dependent."""
    basis = rref_basis((u, v, w))
    if len(basis) != 3:
        raise ValueError("dependent triple")
    return basis  # type: ignore[return-value]


def try_canonical(u: int, v: int, w: int) -> Term | None:
    basis = rref_basis((u, v, w))
    return basis if len(basis) == 3 else None  # type: ignore[return-value]


def seven_set(t: Sequence[int]) -> frozenset[int]:
    u, v, w = t
    return frozenset((u, v, w, u ^ v, u ^ w, v ^ w, u ^ v ^ w))


def seven_list(u: int, v: int, w: int) -> tuple[int, ...]:
    uv = u ^ v
    return (u, v, w, uv, u ^ w, v ^ w, uv ^ w)


@lru_cache(maxsize=1 << 16)
def trivector(u: int, v: int, w: int) -> frozenset[tuple[int, int, int]]:
    """Square-free cubic monomials of (u.x)(v.x)(w.x) mod 2, i.e. u ^ v ^ w."""
    out: set[tuple[int, int, int]] = set()
    for i in iter_bits(u):
        for j in iter_bits(v):
            if j == i:
                continue
            for k in iter_bits(w):
                if k == i or k == j:
                    continue
                out ^= {tuple(sorted((i, j, k)))}
    return frozenset(out)


@dataclass(frozen=True)
class CpDecomposition:
    n: int
    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        if not 0 <= self.n <= f2core.MAX_DIM:
            raise ValueError(f"dimension {self.n} outside [0, {f2core.MAX_DIM}]")
        terms = []
        for t in self.terms:
            if len(t) != 3:
                raise ValueError("terms are triples")
            if any(x < 0 or x >> self.n for x in t):
                raise ValueError(f"factor exceeds dimension {self.n}")
            terms.append(canonical_term(*t))
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def rank(self) -> int:
        return len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def key(self) -> tuple:
        """Multiset identity of the decomposition (order-free)."""
        return (self.n, tuple(sorted(self.terms)))

    def replace(self, remove: Iterable[int], add: Iterable[Term] = ()) -> "CpDecomposition":
        drop = set(remove)
        kept = [t for q, t in enumerate(self.terms) if q not in drop]
        return CpDecomposition(self.n, tuple(kept) + tuple(add))

    def cancel_pairs(self) -> "CpDecomposition":
        """Remove duplicate terms pairwise (equal spans cancel mod 2)."""
        counts = Counter(self.terms)
        kept = []
        for t in self.terms:
            if counts[t] % 2:
                kept.append(t)
                counts[t] = 0
        return CpDecomposition(self.n, tuple(kept))


def cubic_of(d: CpDecomposition) -> CubicTensor:
    C: set[tuple[int, int, int]] = set()
    for t in d.terms:
        C ^= trivector(*t)
    return PhasePolynomial(d.n, C=frozenset(C))


def verify(d: CpDecomposition, c: CubicTensor) -> bool:
    if d.n != c.n:
        raise ValueError("dimension mismatch")
    if c.L or c.Q:
        return False
    return cubic_of(d).C == c.C


def representative_with(t: Sequence[int], z: int) -> Term:
    """Triple (a, b, z) spanning the same subspace as t.

    a, b are the first two RREF basis vectors of the span (lowest pivot
    first) that are independent together with z.
    """
    basis = rref_basis(t)
    if len(basis) != 3:
        raise ValueError("dependent term")
    if z == 0 or z not in seven_set(basis):
        raise ValueError("z is not in the seven-set of the term")
    for a, b in ((basis[0], basis[1]), (basis[0], basis[2]), (basis[1], basis[2])):
        if f2core.is_independent(a, b, z):
            return (a, b, z)
    raise AssertionError("unreachable: some basis pair completes z")


def standard_decomposition(c: CubicTensor) -> CpDecomposition:
    return CpDecomposition(
        c.n, tuple((1 << i, 1 << j, 1 << k) for i, j, k in sorted(c.C))
    )


def split(d: CpDecomposition, q: int, w_new: int) -> CpDecomposition:
    """Replace term q = (u, v, w) by (u, v, w') and (u, v, w + w').

    The factor pair (u, v) is the first two RREF basis vectors of the term.
    Dependent children are dropped and duplicate terms cancel pairwise.
    """
    if w_new == 0:
        raise ValueError("split vector must be nonzero")
    u, v, w = d.terms[q]
    children = [try_canonical(u, v, w_new), try_canonical(u, v, w ^ w_new)]
    children = [c for c in children if c is not None]
    if not children:
        raise ValueError("split produces only dependent terms")
    return d.replace([q], children).cancel_pairs()


def split_cascade(d: CpDecomposition) -> CpDecomposition:
    """Axis-wise splitting into unit vectors, as in the connectivity argument.

    Splits every term by its third factor, then second, then first; dependent
    pieces carry no cubic content and are dropped; duplicates cancel.  The
    result depends only on cubic_of(d).
    """
    current: list[Term] = [tuple(t) for t in d.terms]  # explicit factor triples
    for axis in (2, 1, 0):
        nxt: list[Term] = []
        for fac in current:
            for k in iter_bits(fac[axis]):
                child = list(fac)
                child[axis] = 1 << k
                if f2core.rank(child) == 3:
                    nxt.append(tuple(child))  # type: ignore[arg-type]
        current = nxt
    return CpDecomposition(d.n, tuple(current)).cancel_pairs()
