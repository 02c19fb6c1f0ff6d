"""Bit-packed linear algebra over GF(2).

Vectors are Python ints used as bit sets: bit ``t`` is the coefficient of
``x_t``.  The wrapper types exist for API boundaries and I/O; the algorithms
elsewhere in the package work on raw ints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

# Largest supported dimension; adjustable at runtime.
MAX_DIM = 128


def popcount(x: int) -> int:
    return bin(x).count("1")


def iter_bits(x: int) -> Iterator[int]:
    """Yield the indices of set bits in increasing order."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def unit(i: int) -> int:
    return 1 << i


def bits_to_str(x: int, n: int) -> str:
    return "".join("1" if (x >> t) & 1 else "0" for t in range(n))


def str_to_bits(s: str) -> int:
    x = 0
    for t, ch in enumerate(s):
        if ch == "1":
            x |= 1 << t
        elif ch != "0":
            raise ValueError(f"invalid bit character {ch!r} in {s!r}")
    return x


# ---------------------------------------------------------------------------
# Wrapper types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class F2Vector:
    n: int
    bits: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("negative dimension")
        if self.bits >> self.n:
            raise ValueError(f"bits exceed dimension {self.n}")

    @classmethod
    def from_str(cls, s: str) -> "F2Vector":
        return cls(len(s), str_to_bits(s))

    @classmethod
    def unit(cls, n: int, i: int) -> "F2Vector":
        return cls(n, 1 << i)

    def _check(self, other: "F2Vector") -> None:
        if other.n != self.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")

    def __xor__(self, other: "F2Vector") -> "F2Vector":
        self._check(other)
        return F2Vector(self.n, self.bits ^ other.bits)

    def __and__(self, other: "F2Vector") -> "F2Vector":
        self._check(other)
        return F2Vector(self.n, self.bits & other.bits)

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.bits)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __bool__(self) -> bool:
        return self.bits != 0

    def weight(self) -> int:
        return popcount(self.bits)

    def dot(self, other: "F2Vector") -> int:
        self._check(other)
        return popcount(self.bits & other.bits) & 1

    def __str__(self) -> str:
        return bits_to_str(self.bits, self.n)


@dataclass(frozen=True)
class F2Matrix:
    """Row-major binary matrix; each row is an int of ``ncols`` bits."""

    ncols: int
    rows: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        for r in self.rows:
            if r < 0 or r >> self.ncols:
                raise ValueError(f"row exceeds {self.ncols} columns")

    @classmethod
    def from_strs(cls, rows: Sequence[str]) -> "F2Matrix":
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        return cls(ncols, tuple(str_to_bits(r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls(n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "F2Matrix":
        return cls(ncols, (0,) * nrows)

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> int:
        return (self.rows[i] >> j) & 1

    def transpose(self) -> "F2Matrix":
        return F2Matrix(self.nrows, tuple(transpose(self.rows, self.ncols)))

    def __matmul__(self, other: "F2Matrix") -> "F2Matrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        return F2Matrix(other.ncols, tuple(matmul(self.rows, other.rows)))

    def apply(self, x: int) -> int:
        """Matrix-vector product ``M x`` with ``x`` as a column bit vector."""
        return mat_vec(self.rows, x)

    def rank(self) -> int:
        return rank(self.rows)

    def to_strs(self) -> list[str]:
        return [bits_to_str(r, self.ncols) for r in self.rows]


# ---------------------------------------------------------------------------
# Core routines on int rows
# ---------------------------------------------------------------------------


def rank(rows: Iterable[int]) -> int:
    """Row rank over GF(2)."""
    pivots: dict[int, int] = {}
    r = 0
    for x in rows:
        while x:
            low = x & -x
            p = pivots.get(low)
            if p is None:
                pivots[low] = x
                r += 1
                break
            x ^= p
    return r


def is_independent(*vectors: int) -> bool:
    return rank(vectors) == len(vectors)


def in_span(x: int, basis: Iterable[int]) -> bool:
    basis = list(basis)
    return rank(basis + [x]) == rank(basis)


def rref_basis(vectors: Iterable[int]) -> tuple[int, ...]:
    """Canonical basis of the span: pivot = lowest set bit, fully reduced,
    rows sorted by pivot.  Identical spans give identical output."""
    basis: list[int] = []
    for x in vectors:
        for b in basis:
            if x & (b & -b):
                x ^= b
        if x:
            low = x & -x
            for i, b in enumerate(basis):
                if b & low:
                    basis[i] = b ^ x
            basis.append(x)
    basis.sort(key=lambda b: b & -b)
    return tuple(basis)


def span(vectors: Sequence[int]) -> list[int]:
    """All 2^k elements of the span of ``vectors`` (assumed independent)."""
    out = [0]
    for v in vectors:
        out += [x ^ v for x in out]
    return out


def mat_vec(rows: Sequence[int], x: int) -> int:
    out = 0
    for i, r in enumerate(rows):
        if popcount(r & x) & 1:
            out |= 1 << i
    return out


def transpose(rows: Sequence[int], ncols: int) -> list[int]:
    out = [0] * ncols
    for i, r in enumerate(rows):
        for j in iter_bits(r):
            out[j] |= 1 << i
    return out


def matmul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Product of row-major matrices; row i of the result is sum of b[j] over bits j of a[i]."""
    out = []
    for r in a:
        acc = 0
        for j in iter_bits(r):
            acc ^= b[j]
        out.append(acc)
    return out


def inverse(rows: Sequence[int], n: int) -> list[int]:
    """Inverse of an n x n matrix; raises ValueError when singular."""
    a = list(rows)
    inv = [1 << i for i in range(n)]
    for col in range(n):
        bit = 1 << col
        piv = next((r for r in range(col, n) if a[r] & bit), None)
        if piv is None:
            raise ValueError("singular matrix over GF(2)")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        for r in range(n):
            if r != col and a[r] & bit:
                a[r] ^= a[col]
                inv[r] ^= inv[col]
    return inv


def nullspace(rows: Sequence[int], ncols: int) -> list[int]:
    """Basis of {y : M y = 0} for the row-major matrix M with ``ncols`` columns."""
    pivot_rows: list[tuple[int, int]] = []  # (pivot bit, reduced row)
    for x in rows:
        for bit, r in pivot_rows:
            if x & bit:
                x ^= r
        if x:
            low = x & -x
            pivot_rows = [(b, r ^ x if r & low else r) for b, r in pivot_rows]
            pivot_rows.append((low, x))
    pivot_mask = 0
    for bit, _ in pivot_rows:
        pivot_mask |= bit
    basis = []
    for j in range(ncols):
        fb = 1 << j
        if pivot_mask & fb:
            continue
        y = fb
        for bit, r in pivot_rows:
            if r & fb:
                y |= bit
        basis.append(y)
    return basis


# ---------------------------------------------------------------------------
# Alternating forms
# ---------------------------------------------------------------------------


def is_alternating(rows: Sequence[int]) -> bool:
    n = len(rows)
    for i, r in enumerate(rows):
        if r >> n or (r >> i) & 1:
            return False
        for j in iter_bits(r):
            if not (rows[j] >> i) & 1:
                return False
    return True


def wedge2(a: int, b: int, n: int) -> list[int]:
    """Rows of the alternating matrix a b^T + b a^T."""
    return [(b if (a >> i) & 1 else 0) ^ (a if (b >> i) & 1 else 0) for i in range(n)]


def alternating_pair_decompose(rows: Sequence[int]) -> list[tuple[int, int]]:
    """Split an alternating matrix into rank-2 pieces.

    Returns pairs (a, b) with sum of (a b^T + b a^T) equal to the input and
    len(result) == rank / 2.  Pivot extraction picks the lowest (i, j), i < j,
    with B_ij = 1 and emits the columns i and j of the current residual.
    """
    if not is_alternating(rows):
        raise ValueError("matrix is not alternating")
    b = list(rows)
    n = len(b)
    pairs = []
    for i in range(n):
        while b[i]:
            j = (b[i] & -b[i]).bit_length() - 1
            ci, cj = b[i], b[j]  # columns equal rows by symmetry
            pairs.append((ci, cj))
            for k in range(n):
                upd = (cj if (ci >> k) & 1 else 0) ^ (ci if (cj >> k) & 1 else 0)
                b[k] ^= upd
    return pairs


def recompose_pairs(pairs: Iterable[tuple[int, int]], n: int) -> list[int]:
    out = [0] * n
    for a, b in pairs:
        for i, r in enumerate(wedge2(a, b, n)):
            out[i] ^= r
    return out
