"""Phase polynomials reduced to their mod-2 layers (f1, f2, f3).

A polynomial f = f1 + 2 f2 + 4 f3 (mod 8) is stored as three sets of sorted
index tuples.  Set membership is the mod-2 coefficient, which is all that
matters up to Clifford gates.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from . import f2core
from .f2core import iter_bits

Pair = tuple[int, int]
Triple = tuple[int, int, int]


@dataclass(frozen=True)
class CostModel:
    c1: int
    c2: int
    c3: int
    name: str = ""

    def __post_init__(self):
        if min(self.c1, self.c2, self.c3) <= 0:
            raise ValueError("cost weights must be positive")


UNITARY = CostModel(1, 3, 7, "unitary")
FACTORY = CostModel(1, 2, 2, "factory")
COST_MODELS = {"unitary": UNITARY, "factory": FACTORY}


def _sorted(t: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(t))


@dataclass(frozen=True)
class PhasePolynomial:
    n: int
    L: frozenset[int] = frozenset()
    Q: frozenset[Pair] = frozenset()
    C: frozenset[Triple] = frozenset()

    def __post_init__(self):
        if not 0 <= self.n <= f2core.MAX_DIM:
            raise ValueError(f"dimension {self.n} outside [0, {f2core.MAX_DIM}]")
        L = frozenset(self.L)
        Q = frozenset(_sorted(p) for p in self.Q)
        C = frozenset(_sorted(t) for t in self.C)
        for i in L:
            if not 0 <= i < self.n:
                raise ValueError(f"linear index {i} out of range")
        for p in Q:
            if len(p) != 2 or p[0] == p[1] or not (0 <= p[0] and p[1] < self.n):
                raise ValueError(f"bad quadratic monomial {p}")
        for t in C:
            if len(t) != 3 or len(set(t)) != 3 or t[0] < 0 or t[2] >= self.n:
                raise ValueError(f"bad cubic monomial {t}")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "C", C)

    @classmethod
    def cubic(cls, n: int, triples: Iterable[Sequence[int]]) -> "PhasePolynomial":
        """Build a pure cubic polynomial, cancelling repeated monomials mod 2."""
        C: set[Triple] = set()
        for t in triples:
            C ^= {_sorted(t)}
        return cls(n, C=frozenset(C))

    @property
    def is_cubic(self) -> bool:
        return not self.L and not self.Q

    def cubic_part(self) -> "PhasePolynomial":
        return PhasePolynomial(self.n, C=self.C)

    def monomial_count(self) -> int:
        return len(self.L) + len(self.Q) + len(self.C)

    def key(self) -> tuple:
        """Canonical sorted monomial lists; equal keys mean equal polynomials."""
        return (self.n, tuple(sorted(self.L)), tuple(sorted(self.Q)), tuple(sorted(self.C)))

    def __str__(self) -> str:
        parts = [f"x{i}" for i in sorted(self.L)]
        parts += [f"2x{i}x{j}" for i, j in sorted(self.Q)]
        parts += [f"4x{i}x{j}x{k}" for i, j, k in sorted(self.C)]
        return " + ".join(parts) if parts else "0"

    def evaluate(self, x: int) -> int:
        """Value mod 8 of the representative L + 2Q + 4C at the bit vector x."""
        v = sum(1 for i in self.L if (x >> i) & 1)
        v += 2 * sum(1 for i, j in self.Q if (x >> i) & 1 and (x >> j) & 1)
        v += 4 * sum(1 for i, j, k in self.C if (x >> i) & (x >> j) & (x >> k) & 1)
        return v % 8


CubicTensor = PhasePolynomial


def cost(p: PhasePolynomial, m: CostModel = UNITARY) -> int:
    return m.c1 * len(p.L) + m.c2 * len(p.Q) + m.c3 * len(p.C)


# ---------------------------------------------------------------------------
# Signature of a gate synthesis matrix
# ---------------------------------------------------------------------------


def signature_of_rows(rows: Iterable[int], n: int) -> PhasePolynomial:
    """Mod-2 signature (L, Q, C) of a multiset of parity rows."""
    L: set[int] = set()
    Q: set[Pair] = set()
    C: set[Triple] = set()
    for r in rows:
        idx = list(iter_bits(r))
        L.symmetric_difference_update(idx)
        Q.symmetric_difference_update(combinations(idx, 2))
        C.symmetric_difference_update(combinations(idx, 3))
    return PhasePolynomial(n, frozenset(L), frozenset(Q), frozenset(C))


def signature_of_matrix(a) -> PhasePolynomial:
    """Signature of a GateSynthesisMatrix or F2Matrix."""
    return signature_of_rows(a.rows, a.n if hasattr(a, "n") else a.ncols)


# ---------------------------------------------------------------------------
# Elementary substitution x_i <- x_i + x_j
# ---------------------------------------------------------------------------


def substitute(p: PhasePolynomial, i: int, j: int) -> PhasePolynomial:
    """Mod-2 class of f after replacing x_i by x_i XOR x_j."""
    if i == j:
        raise ValueError("substitution needs i != j")
    if not (0 <= i < p.n and 0 <= j < p.n):
        raise ValueError("index out of range")
    L, Q, C = set(p.L), set(p.Q), set(p.C)
    for t in p.C:
        if i in t and j not in t:
            C ^= {_sorted(j if a == i else a for a in t)}
    for q in p.Q:
        if i in q and j not in q:
            a = q[0] if q[1] == i else q[1]
            Q ^= {_sorted((j, a))}
            C ^= {_sorted((i, j, a))}
    if i in p.L:
        L ^= {j}
        Q ^= {_sorted((i, j))}
    return PhasePolynomial(p.n, frozenset(L), frozenset(Q), frozenset(C))


def substitution_matrix(n: int, i: int, j: int) -> list[int]:
    """Rows of E with (E x)_i = x_i + x_j, i.e. identity plus e_i e_j^T."""
    rows = [1 << k for k in range(n)]
    rows[i] |= 1 << j
    return rows


# ---------------------------------------------------------------------------
# Truth-table interpolation (test oracle)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightedPolynomial:
    """Integer coefficients of f = sum L_i x_i + 2 sum Q_ij x_i x_j + 4 sum T_ijk x_i x_j x_k."""

    n: int
    L: Mapping[int, int]  # mod 8
    Q: Mapping[Pair, int]  # mod 4
    T: Mapping[Triple, int]  # mod 2

    def mod2(self) -> PhasePolynomial:
        return PhasePolynomial(
            self.n,
            frozenset(i for i, c in self.L.items() if c % 2),
            frozenset(q for q, c in self.Q.items() if c % 2),
            frozenset(t for t, c in self.T.items() if c % 2),
        )


def truth_table(p: PhasePolynomial) -> list[int]:
    return [p.evaluate(x) for x in range(1 << p.n)]


def interpolate_oracle(values: Sequence[int] | Mapping[int, int], n: int) -> WeightedPolynomial:
    """Recover the weighted polynomial from a full Z8 truth table.

    Moebius inversion gives integer coefficients c_S of the multilinear
    expansion; c_S for |S| >= 4 must vanish mod 8, and c_S must be divisible
    by 2^(|S|-1) for the table to come from a phase polynomial.
    """
    if n > 10:
        raise ValueError("interpolation limited to n <= 10")
    size = 1 << n
    if isinstance(values, Mapping):
        if set(values) != set(range(size)):
            raise ValueError("incomplete truth table")
        vals = [values[x] for x in range(size)]
    else:
        vals = list(values)
        if len(vals) != size:
            raise ValueError("incomplete truth table")
    for v in vals:
        if not 0 <= v < 8:
            raise ValueError(f"value {v} outside Z8")
    c = list(vals)
    for bit in range(n):
        m = 1 << bit
        for s in range(size):
            if s & m:
                c[s] -= c[s ^ m]
    L: dict[int, int] = {}
    Q: dict[Pair, int] = {}
    T: dict[Triple, int] = {}
    for s in range(1, size):
        coef = c[s] % 8
        idx = tuple(iter_bits(s))
        deg = len(idx)
        if deg >= 4:
            if coef:
                raise ValueError("table is not a degree-3 phase polynomial")
            continue
        if coef % (1 << (deg - 1)):
            raise ValueError("coefficient not divisible as required by degree")
        scaled = coef >> (deg - 1)
        if deg == 1 and scaled:
            L[idx[0]] = scaled % 8
        elif deg == 2 and scaled % 4:
            Q[idx] = scaled % 4
        elif deg == 3 and scaled % 2:
            T[idx] = 1
    return WeightedPolynomial(n, L, Q, T)
