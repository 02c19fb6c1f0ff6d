"""Flip-graph search on bilinear decompositions (no GL(3,2) symmetry)."""

from __future__ import annotations

import random

from ..f2core import iter_bits
from ..bilinear import (
    BilinearDecomposition,
    BilinearTensor,
    BTerm,
    BinaryPolynomial,
    conv_tensor,
    field_tensor,
    irreducible_poly,
    karatsuba,
    project,
    reduction_matrix,
    verify_bilinear,
)
from .search import Pool, SearchLog, WalkParams, pool_search, sample_pair


def _with(t: BTerm, axis: int, x: int) -> BTerm:
    out = list(t)
    out[axis] = x
    return tuple(out)  # type: ignore[return-value]


def _others(axis: int) -> tuple[int, int]:
    return ((1, 2), (0, 2), (0, 1))[axis]


# ---------------------------------------------------------------------------
# Deterministic moves
# ---------------------------------------------------------------------------


def bilinear_flip(
    d: BilinearDecomposition, q1: int, q2: int, axis: int, swap: bool = False
) -> BilinearDecomposition:
    """(a, b1, c1) + (a, b2, c2) -> (a, b1 + b2, c1) + (a, b2, c1 + c2).

    ``axis`` holds the shared factor a; the remaining axes play b and c in
    increasing order, or reversed when ``swap`` is set.  Children with a
    zero factor are dropped.
    """
    if q1 == q2:
        raise ValueError("flip needs two distinct terms")
    t1, t2 = d.terms[q1], d.terms[q2]
    if t1[axis] != t2[axis]:
        raise ValueError("terms do not share a factor on that axis")
    bx, cx = _others(axis)
    if swap:
        bx, cx = cx, bx
    k1 = _with(t1, bx, t1[bx] ^ t2[bx])
    k2 = _with(t2, cx, t1[cx] ^ t2[cx])
    kids = [k for k in (k1, k2) if all(k)]
    return _replace(d, (q1, q2), kids)


def bilinear_reduce(d: BilinearDecomposition, q1: int, q2: int) -> BilinearDecomposition:
    """Merge two terms equal on two axes by XOR on the third."""
    if q1 == q2:
        raise ValueError("needs two distinct terms")
    t1, t2 = d.terms[q1], d.terms[q2]
    diff = [k for k in range(3) if t1[k] != t2[k]]
    if len(diff) > 1:
        raise ValueError("terms differ on more than one axis")
    if not diff:
        return _replace(d, (q1, q2), [])
    k = diff[0]
    return _replace(d, (q1, q2), [_with(t1, k, t1[k] ^ t2[k])])


def bilinear_plus(d: BilinearDecomposition, q1: int, q2: int) -> BilinearDecomposition:
    """(u1+u2) v1 w1 + u2 (v1+v2) w2 + u2 v1 (w1+w2); terms must differ on every axis."""
    if q1 == q2:
        raise ValueError("needs two distinct terms")
    (u1, v1, w1), (u2, v2, w2) = d.terms[q1], d.terms[q2]
    if u1 == u2 or v1 == v2 or w1 == w2:
        raise ValueError("plus needs terms differing on every axis")
    kids = [(u1 ^ u2, v1, w1), (u2, v1 ^ v2, w2), (u2, v1, w1 ^ w2)]
    return _replace(d, (q1, q2), kids)


def _rank_factor(rows: dict[int, int]) -> list[tuple[int, int]]:
    """Write M (row index -> row bits) as a minimal sum of outer products x y^T."""
    basis: list[tuple[int, int]] = []  # (pivot bit, reduced row)
    coeff: list[int] = []
    for i, r in sorted(rows.items()):
        # Express row i through the basis built so far; a leftover starts a
        # new basis row.
        for k, (piv, b) in enumerate(basis):
            if r >> piv & 1:
                r ^= b
                coeff[k] |= 1 << i
        if r:
            basis.append(((r & -r).bit_length() - 1, r))
            coeff.append(1 << i)
    return [(coeff[k], b) for k, (_, b) in enumerate(basis)]


def slice_reduce(d: BilinearDecomposition, axis: int, a: int) -> BilinearDecomposition:
    """Rewrite all terms with factor ``a`` on ``axis`` as a minimal set.

    Those terms sum to a (x) M with M = sum b c^T on the other two axes;
    a rank factorisation of M gives rank(M) terms.
    """
    bx, cx = _others(axis)
    group = [q for q, t in enumerate(d.terms) if t[axis] == a]
    rows: dict[int, int] = {}
    for q in group:
        t = d.terms[q]
        for i in iter_bits(t[bx]):
            rows[i] = rows.get(i, 0) ^ t[cx]
    kids = []
    for x, y in _rank_factor({i: r for i, r in rows.items() if r}):
        kid = [0, 0, 0]
        kid[axis], kid[bx], kid[cx] = a, x, y
        kids.append(tuple(kid))
    return _replace(d, group, kids)


def bilinear_reduce_pass(d: BilinearDecomposition) -> BilinearDecomposition:
    """Apply slice reductions while any of them lowers the rank.

    Each round takes the largest gain; ties go to the lowest (axis, factor).
    """
    while True:
        best = None
        for axis in range(3):
            counts: dict[int, int] = {}
            for t in d.terms:
                counts[t[axis]] = counts.get(t[axis], 0) + 1
            for a in sorted(x for x, c in counts.items() if c > 1):
                out = slice_reduce(d, axis, a)
                gain = d.rank - out.rank
                if gain > 0 and (best is None or gain > best[0]):
                    best = (gain, out)
        if best is None:
            return d
        d = best[1]


def _replace(d: BilinearDecomposition, drop, add) -> BilinearDecomposition:
    gone = set(drop)
    kept = [t for q, t in enumerate(d.terms) if q not in gone]
    return BilinearDecomposition(d.dims, tuple(kept) + tuple(add))


# ---------------------------------------------------------------------------
# Mutable walk state
# ---------------------------------------------------------------------------


class _BWalker:
    """Terms with per-axis factor indexes and a pair index for reductions."""

    def __init__(self, terms, rng: random.Random):
        self.rng = rng
        self.rand = rng.random
        self.terms: list[BTerm] = []
        self.fidx: tuple[dict, dict, dict] = ({}, {}, {})
        self.pidx: dict[tuple[int, int, int], list[int]] = {}
        self.shared: list[tuple[int, int]] = []
        self.spos: dict[tuple[int, int], int] = {}
        for t in terms:
            self.settle(self.add(t))

    def _link(self, axis: int, x: int, slot: int) -> None:
        idx = self.fidx[axis]
        lst = idx.get(x)
        if lst is None:
            idx[x] = [slot]
            return
        lst.append(slot)
        if len(lst) == 2:
            key = (axis, x)
            self.spos[key] = len(self.shared)
            self.shared.append(key)

    def _unlink(self, axis: int, x: int, slot: int) -> None:
        idx = self.fidx[axis]
        lst = idx[x]
        lst.remove(slot)
        if len(lst) == 1:
            key = (axis, x)
            p = self.spos.pop(key)
            last = self.shared.pop()
            if last != key:
                self.shared[p] = last
                self.spos[last] = p
        elif not lst:
            del idx[x]

    @staticmethod
    def _pkeys(t: BTerm):
        a, b, c = t
        return ((0, b, c), (1, a, c), (2, a, b))

    def _index(self, t: BTerm, slot: int) -> None:
        for axis in range(3):
            self._link(axis, t[axis], slot)
        for k in self._pkeys(t):
            self.pidx.setdefault(k, []).append(slot)

    def _unindex(self, t: BTerm, slot: int) -> None:
        for axis in range(3):
            self._unlink(axis, t[axis], slot)
        for k in self._pkeys(t):
            lst = self.pidx[k]
            lst.remove(slot)
            if not lst:
                del self.pidx[k]

    def _relabel(self, t: BTerm, old: int, new: int) -> None:
        for axis in range(3):
            lst = self.fidx[axis][t[axis]]
            lst[lst.index(old)] = new
        for k in self._pkeys(t):
            lst = self.pidx[k]
            lst[lst.index(old)] = new

    def add(self, t: BTerm) -> int:
        slot = len(self.terms)
        self.terms.append(t)
        self._index(t, slot)
        return slot

    def remove(self, slot: int) -> None:
        self._unindex(self.terms[slot], slot)
        last = len(self.terms) - 1
        if slot != last:
            t = self.terms[last]
            self._relabel(t, last, slot)
            self.terms[slot] = t
        self.terms.pop()

    def overwrite(self, slot: int, t: BTerm) -> None:
        self._unindex(self.terms[slot], slot)
        self.terms[slot] = t
        self._index(t, slot)

    def rank(self) -> int:
        return len(self.terms)

    def settle(self, slot: int) -> None:
        """Merge slot with any term equal to it on two axes, repeatedly."""
        while True:
            t = self.terms[slot]
            hit = -1
            for omit, k in enumerate(self._pkeys(t)):
                lst = self.pidx[k]
                if len(lst) > 1:
                    hit = lst[0] if lst[0] != slot else lst[1]
                    break
            if hit < 0:
                return
            x = t[omit] ^ self.terms[hit][omit]
            last = len(self.terms) - 1
            if not x:
                for q in sorted((slot, hit), reverse=True):
                    self.remove(q)
                return
            self.overwrite(slot, _with(t, omit, x))
            self.remove(hit)
            if slot == last:
                slot = hit

    def flip(self) -> bool:
        shared = self.shared
        if not shared:
            return False
        rand = self.rand
        axis, a = shared[int(rand() * len(shared))]
        lst = self.fidx[axis][a]
        k = len(lst)
        i = int(rand() * k)
        j = int(rand() * (k - 1))
        if j >= i:
            j += 1
        q1, q2 = lst[i], lst[j]
        bx, cx = _others(axis)
        if rand() < 0.5:
            bx, cx = cx, bx
        t1, t2 = self.terms[q1], self.terms[q2]
        nb = t1[bx] ^ t2[bx]
        nc = t1[cx] ^ t2[cx]
        ok1, ok2 = nb != 0, nc != 0
        if ok1:
            self.overwrite(q1, _with(t1, bx, nb))
        if ok2:
            self.overwrite(q2, _with(t2, cx, nc))
        if not ok1 or not ok2:
            if not ok1 and not ok2:
                for q in sorted((q1, q2), reverse=True):
                    self.remove(q)
                return True
            dead, live = (q1, q2) if not ok1 else (q2, q1)
            if live == len(self.terms) - 1:
                live = dead
            self.remove(dead)
            self.settle(live)
            return True
        t2n = self.terms[q2]
        self.settle(q1)
        if q2 < len(self.terms) and self.terms[q2] is t2n:
            self.settle(q2)
        else:
            for q in range(len(self.terms)):
                if self.terms[q] is t2n:
                    self.settle(q)
                    break
        return True

    def plus(self, attempts: int = 50) -> bool:
        rng = self.rng
        if len(self.terms) < 2:
            return False
        for _ in range(attempts):
            q1, q2 = sample_pair(range(len(self.terms)), rng)
            t1, t2 = self.terms[q1], self.terms[q2]
            if t1[0] != t2[0] and t1[1] != t2[1] and t1[2] != t2[2]:
                break
        else:
            return False
        perm = [0, 1, 2]
        rng.shuffle(perm)
        x, y, z = perm
        u1, v1, w1 = t1[x], t1[y], t1[z]
        u2, v2, w2 = t2[x], t2[y], t2[z]
        for q in sorted((q1, q2), reverse=True):
            self.remove(q)
        for kid in ((u1 ^ u2, v1, w1), (u2, v1 ^ v2, w2), (u2, v1, w1 ^ w2)):
            t = [0, 0, 0]
            t[x], t[y], t[z] = kid
            self.settle(self.add(tuple(t)))  # type: ignore[arg-type]
        return True


def bilinear_random_walk(
    d: BilinearDecomposition, params: WalkParams, rng: random.Random
) -> tuple[BilinearDecomposition | None, int]:
    """Bilinear counterpart of symmetric.random_walk.

    The periodic probe is bilinear_reduce_pass in place of the
    quadratic-form pass.
    """
    start = d.rank
    w = _BWalker(d.terms, rng)
    if w.rank() < start:
        # Merges applied while indexing the start already lower the rank.
        return BilinearDecomposition(d.dims, tuple(w.terms)), 0
    low = start
    stagnant = 0
    for step in range(1, params.walk_limit + 1):
        if not w.flip():
            if w.rank() > start or not w.plus():
                return None, step
        r = w.rank()
        if r < low:
            low, stagnant = r, 0
        else:
            stagnant += 1
        if r < start:
            return BilinearDecomposition(d.dims, tuple(w.terms)), step
        if step % params.sge_interval == 0:
            red = bilinear_reduce_pass(BilinearDecomposition(d.dims, tuple(w.terms)))
            if red.rank < start:
                return red, step
            if red.rank < r:
                w = _BWalker(red.terms, rng)
        if stagnant >= params.plateau and w.rank() <= start:
            w.plus()
            stagnant = 0
    return None, params.walk_limit


def bilinear_search(
    t: BilinearTensor,
    init: BilinearDecomposition,
    params: WalkParams = WalkParams(),
) -> tuple[Pool, SearchLog]:
    if not verify_bilinear(init, t):
        raise ValueError("initial decomposition does not recompose the tensor")
    return pool_search(init, bilinear_random_walk, lambda d: d.key(), lambda d: d.rank, params)


# ---------------------------------------------------------------------------
# GF(2^p) pipeline
# ---------------------------------------------------------------------------


def gf_search(
    p: int,
    params: WalkParams = WalkParams(),
    h: BinaryPolynomial | None = None,
    formulations: tuple[str, ...] = ("field", "conv"),
) -> tuple[BilinearDecomposition, str, list[tuple[str, SearchLog]]]:
    """Search the field tensor directly and via the convolution tensor.

    Both start from the Karatsuba scheme (projected for the field target);
    convolution results are projected.  Formulations run in order and later
    ones are skipped once the target rank is met.  Returns the lowest-rank
    field decomposition, the formulation that produced it, and the logs.
    """
    h = irreducible_poly(p) if h is None else h
    r = reduction_matrix(h, p)
    target = field_tensor(p, h)
    best: BilinearDecomposition | None = None
    src = ""
    logs = []
    for form in formulations:
        if best is not None and params.target_rank is not None and best.rank <= params.target_rank:
            break
        if form == "field":
            pool, log = bilinear_search(target, project(karatsuba(p), r), params)
            cands = pool.members
        elif form == "conv":
            pool, log = bilinear_search(conv_tensor(p), karatsuba(p), params)
            cands = [project(m, r) for m in pool.members]
        else:
            raise ValueError(f"unknown formulation {form!r}")
        logs.append((form, log))
        for c in sorted(cands, key=lambda m: (m.rank, m.key())):
            if best is None or c.rank < best.rank:
                best, src = c, form
            break
    assert best is not None and verify_bilinear(best, target)
    return best, src, logs
