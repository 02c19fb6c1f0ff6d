"""T-count reduction on gate synthesis matrices (TODD-style moves).

A gate synthesis matrix is a multiset of parity rows a_r; its signature is
the symmetric tensor sum_r a_r (x) a_r (x) a_r over GF(2).  The move
A <- A + y z^T keeps the signature when the linear condition below holds,
and shrinks the matrix when it creates zero rows or equal pairs.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import f2core
from .cpdecomp import CpDecomposition, seven_list
from .f2core import bits_to_str
from .phasepoly import PhasePolynomial, signature_of_rows


@dataclass(frozen=True)
class GateSynthesisMatrix:
    n: int
    rows: tuple[int, ...] = ()

    def __post_init__(self):
        for r in self.rows:
            if r < 0 or r >> self.n:
                raise ValueError(f"row exceeds dimension {self.n}")
        object.__setattr__(self, "rows", tuple(self.rows))

    @property
    def rank(self) -> int:
        return len(self.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def normalize(self) -> "GateSynthesisMatrix":
        return GateSynthesisMatrix(self.n, normalize_rows(self.rows))

    def signature(self) -> PhasePolynomial:
        return signature_of_rows(self.rows, self.n)

    def key(self) -> tuple:
        return (self.n, tuple(sorted(self.rows)))


def normalize_rows(rows: Iterable[int]) -> tuple[int, ...]:
    """Drop zero rows and cancel equal rows pairwise; sorted output."""
    counts = Counter(r for r in rows if r)
    return tuple(sorted(r for r, c in counts.items() if c % 2))


def expand_cp(d: CpDecomposition) -> GateSynthesisMatrix:
    """Seven parities per term, then normalize."""
    rows: list[int] = []
    for t in d.terms:
        rows.extend(seven_list(*t))
    return GateSynthesisMatrix(d.n, normalize_rows(rows))


# ---------------------------------------------------------------------------
# Signature-preservation system
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _index_arrays(n: int):
    pairs = np.array(list(combinations(range(n), 2)), dtype=np.intp).reshape(-1, 2)
    triples = np.array(list(combinations(range(n), 3)), dtype=np.intp).reshape(-1, 3)
    return pairs, triples


def _bits_array(rows: Sequence[int], n: int) -> np.ndarray:
    return np.array([[(r >> i) & 1 for i in range(n)] for r in rows], dtype=np.uint8).reshape(
        len(rows), n
    )


def chi_columns(rows: Sequence[int], z: int, n: int) -> list[int]:
    """Per-row change of the signature (sans z z z) as bitmasks over equations.

    For pairs i<j the entry is a_i z_j + z_i a_j; for triples i<j<k it is the
    six mixed products of two a's and one z or one a and two z's.  Diagonal
    entries vanish identically mod 2.
    """
    if not rows:
        return []
    A = _bits_array(rows, n)
    zv = _bits_array([z], n)[0]
    pairs, triples = _index_arrays(n)
    parts = []
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        parts.append((A[:, i] & zv[j]) ^ (zv[i] & A[:, j]))
    if len(triples):
        i, j, k = triples[:, 0], triples[:, 1], triples[:, 2]
        ai, aj, ak = A[:, i], A[:, j], A[:, k]
        zi, zj, zk = zv[i], zv[j], zv[k]
        parts.append(
            (zi & aj & ak) ^ (ai & zj & ak) ^ (ai & aj & zk)
            ^ (zi & zj & ak) ^ (zi & aj & zk) ^ (ai & zj & zk)
        )
    if not parts:
        return [0] * len(rows)
    M = np.concatenate(parts, axis=1)
    packed = np.packbits(M, axis=1, bitorder="little")
    return [int.from_bytes(bytes(row), "little") for row in packed]


def _kernel(cols: Sequence[int]) -> list[int]:
    """Basis (as row-selection masks) of {y : xor of cols[r] over y_r = 1 is 0}."""
    pivots: dict[int, tuple[int, int]] = {}  # low bit -> (vector, combination)
    basis = []
    for r, v in enumerate(cols):
        comb = 1 << r
        while v:
            low = v & -v
            if low not in pivots:
                pivots[low] = (v, comb)
                break
            pv, pc = pivots[low]
            v ^= pv
            comb ^= pc
        if not v:
            basis.append(comb)
    return basis


def apply_move(rows: Sequence[int], y: int, z: int) -> tuple[int, ...]:
    """Rows of A + y z^T, plus z when y has odd weight, normalized."""
    out = [r ^ z if (y >> q) & 1 else r for q, r in enumerate(rows)]
    if f2core.popcount(y) % 2:
        out.append(z)
    return normalize_rows(out)


class _Affine:
    """Incremental solver for c with f . c = b over a fixed number of unknowns."""

    def __init__(self):
        self.piv: dict[int, tuple[int, int]] = {}

    def add(self, f: int, b: int) -> bool:
        while f:
            low = f & -f
            if low not in self.piv:
                self.piv[low] = (f, b)
                return True
            pf, pb = self.piv[low]
            f ^= pf
            b ^= pb
        return b == 0

    def solution(self) -> int:
        c = 0
        for low in sorted(self.piv, reverse=True):
            f, b = self.piv[low]
            rest = f ^ low
            if f2core.popcount(rest & c) % 2 != b:
                c |= low
        return c


def _candidate_ys(rows: Sequence[int], z: int, basis: list[int]) -> list[int]:
    k = len(basis)
    if not k:
        return []
    r = len(rows)
    func = [0] * r
    for b, vec in enumerate(basis):
        for q in f2core.iter_bits(vec):
            func[q] |= 1 << b
    cons: list[tuple[int, int]] = []
    for p in range(r):
        for q in range(p + 1, r):
            if rows[p] ^ rows[q] == z:
                cons.append((func[p] ^ func[q], 1))
    for q in range(r):
        if rows[q] == z:
            cons.append((func[q], 1))
    if not cons:
        return []
    parity = 0
    for f in func:
        parity ^= f
    out = []
    for even in (True, False):
        sys_ = _Affine()
        if even and not sys_.add(parity, 0):
            continue
        for f, b in cons:
            sys_.add(f, b)
        c = sys_.solution()
        y = 0
        for b in f2core.iter_bits(c):
            y ^= basis[b]
        if y:
            out.append(y)
    return out


def _best_for_z(rows: Sequence[int], z: int, n: int) -> tuple[int, int]:
    """(row reduction, y) of the best move found for z; reduction 0 if none."""
    basis = _kernel(chi_columns(rows, z, n))
    best = (0, 0)
    for y in _candidate_ys(rows, z, basis):
        gain = len(rows) - len(apply_move(rows, y, z))
        if gain > best[0]:
            best = (gain, y)
    return best


def find_todd_move(a: GateSynthesisMatrix, z: int) -> int | None:
    """Row-selection mask y whose move with z shrinks the matrix, if one is found."""
    if z == 0:
        raise ValueError("z must be nonzero")
    gain, y = _best_for_z(a.rows, z, a.n)
    return y if gain > 0 else None


def candidate_zs(rows: Sequence[int], n: int) -> list[int]:
    """Pairwise row sums and single rows, deduplicated, in bit-string order."""
    zs = set(rows)
    for p, q in combinations(rows, 2):
        zs.add(p ^ q)
    zs.discard(0)
    return sorted(zs, key=lambda z: bits_to_str(z, n))


def _moves(rows: tuple[int, ...], n: int) -> list[tuple[int, str, int, int]]:
    out = []
    for z in candidate_zs(rows, n):
        gain, y = _best_for_z(rows, z, n)
        if gain > 0:
            out.append((gain, bits_to_str(z, n), z, y))
    return out


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------


def todd_greedy(a: GateSynthesisMatrix) -> GateSynthesisMatrix:
    """Apply the largest reduction each round; ties go to the smallest z string."""
    rows = normalize_rows(a.rows)
    n = a.n
    while True:
        moves = _moves(rows, n)
        if not moves:
            return GateSynthesisMatrix(n, rows)
        gain, _, z, y = min(moves, key=lambda m: (-m[0], m[1]))
        rows = apply_move(rows, y, z)


def todd_beam(a: GateSynthesisMatrix, width: int = 1 << 10) -> GateSynthesisMatrix:
    """Beam over reducing moves, ranked by row count, deduplicated by row set."""
    if width < 1:
        raise ValueError("beam width must be >= 1")
    n = a.n
    start = normalize_rows(a.rows)
    best = start
    pool = [start]
    seen = {start}
    while pool:
        children = []
        for pos, rows in enumerate(pool):
            for gain, zkey, z, y in _moves(rows, n):
                children.append((len(rows) - gain, pos, zkey, rows, z, y))
        children.sort(key=lambda c: c[:3])
        pool = []
        for _, _, _, rows, z, y in children:
            child = apply_move(rows, y, z)
            if child in seen:
                continue
            seen.add(child)
            pool.append(child)
            if len(child) < len(best):
                best = child
            if len(pool) >= width:
                break
    return GateSynthesisMatrix(n, best)


def todd(a: GateSynthesisMatrix, strategy: str = "greedy", width: int = 1 << 10) -> GateSynthesisMatrix:
    if strategy == "greedy":
        return todd_greedy(a)
    if strategy == "beam":
        return todd_beam(a, width)
    raise ValueError(f"unknown strategy {strategy!r}")


def cp_initialized_todd(
    pool: Iterable[CpDecomposition], strategy: str = "greedy", width: int = 1 << 10
) -> GateSynthesisMatrix:
    """Run todd from the expansion of every pool member; keep the smallest."""
    members = {d.key(): d for d in pool}
    if not members:
        raise ValueError("empty pool")
    best: GateSynthesisMatrix | None = None
    for key in sorted(members):
        out = todd(expand_cp(members[key]), strategy, width)
        if best is None or (out.rank, out.key()) < (best.rank, best.key()):
            best = out
    assert best is not None
    return best
