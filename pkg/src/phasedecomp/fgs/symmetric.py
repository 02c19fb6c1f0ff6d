"""Flip-graph moves and random walks on symmetric (cubic) decompositions."""

from __future__ import annotations

import random

from ..cpdecomp import (
    CpDecomposition,
    CubicTensor,
    Term,
    representative_with,
    seven_list,
    try_canonical,
    verify,
)
from ..sge import sge_pass_greedy
from .search import Pool, SearchLog, WalkParams, pool_search, sample_pair


# ---------------------------------------------------------------------------
# Deterministic moves on CpDecomposition
# ---------------------------------------------------------------------------


def flip(d: CpDecomposition, q1: int, q2: int, z: int) -> CpDecomposition:
    """(u1, v1, z) + (u2, v2, z) -> (u1 + u2, v1, z) + (u2, v1 + v2, z).

    Representatives come from representative_with; a child that degenerates
    to a dependent triple is dropped.
    """
    if q1 == q2:
        raise ValueError("flip needs two distinct terms")
    u1, v1, _ = representative_with(d.terms[q1], z)
    u2, v2, _ = representative_with(d.terms[q2], z)
    kids = [try_canonical(u1 ^ u2, v1, z), try_canonical(u2, v1 ^ v2, z)]
    return d.replace([q1, q2], [k for k in kids if k is not None])


def immediate_reduce(d: CpDecomposition, q1: int, q2: int) -> CpDecomposition:
    """Merge two terms whose spans share a plane (or cancel equal spans)."""
    if q1 == q2:
        raise ValueError("needs two distinct terms")
    s1 = seven_list(*d.terms[q1])
    s2 = set(seven_list(*d.terms[q2]))
    common = [x for x in s1 if x in s2]
    if len(common) == 7:
        return d.replace([q1, q2])
    if len(common) != 3:
        raise ValueError("terms do not share a plane")
    a, b = common[0], common[1]
    plane = {0, a, b, a ^ b}
    w1 = next(x for x in s1 if x not in plane)
    w2 = next(x for x in s2 if x not in plane)
    kid = try_canonical(a, b, w1 ^ w2)
    return d.replace([q1, q2], [kid] if kid is not None else [])


def plus(d: CpDecomposition, q1: int, q2: int) -> CpDecomposition:
    """Rank +1 move (u1+u2) v1 w1 + u2 (v1+v2) w2 + u2 v1 (w1+w2).

    Requires disjoint seven-sets so all three children are independent.
    """
    if q1 == q2:
        raise ValueError("needs two distinct terms")
    t1, t2 = d.terms[q1], d.terms[q2]
    if set(seven_list(*t1)) & set(seven_list(*t2)):
        raise ValueError("plus needs terms with disjoint seven-sets")
    u1, v1, w1 = t1
    u2, v2, w2 = t2
    kids = [(u1 ^ u2, v1, w1), (u2, v1 ^ v2, w2), (u2, v1, w1 ^ w2)]
    return d.replace([q1, q2], kids)


# ---------------------------------------------------------------------------
# Mutable walk state
# ---------------------------------------------------------------------------


class _Walker:
    """Terms plus an index from seven-set element to the slots containing it.

    ``shared`` lists elements held by two or more terms, with ``spos`` giving
    each one's position, so a flip candidate is sampled in O(1).
    """

    def __init__(self, terms, rng: random.Random):
        self.rand = rng.random
        self.rng = rng
        self.terms: list[Term] = []
        self.sev: list[tuple[int, ...]] = []
        self.index: dict[int, list[int]] = {}
        self.shared: list[int] = []
        self.spos: dict[int, int] = {}
        for t in terms:
            self.settle(self.add(t))

    # -- index maintenance --------------------------------------------------

    def _link(self, x: int, slot: int) -> None:
        lst = self.index.get(x)
        if lst is None:
            self.index[x] = [slot]
            return
        lst.append(slot)
        if len(lst) == 2:
            self.spos[x] = len(self.shared)
            self.shared.append(x)

    def _unlink(self, x: int, slot: int) -> None:
        lst = self.index[x]
        lst.remove(slot)
        if len(lst) == 1:
            p = self.spos.pop(x)
            last = self.shared.pop()
            if last != x:
                self.shared[p] = last
                self.spos[last] = p
        elif not lst:
            del self.index[x]

    def add(self, t: Term) -> int:
        slot = len(self.terms)
        s = seven_list(*t)
        self.terms.append(t)
        self.sev.append(s)
        for x in s:
            self._link(x, slot)
        return slot

    def remove(self, slot: int) -> None:
        for x in self.sev[slot]:
            self._unlink(x, slot)
        last = len(self.terms) - 1
        if slot != last:
            for x in self.sev[last]:
                lst = self.index[x]
                lst[lst.index(last)] = slot
            self.terms[slot] = self.terms[last]
            self.sev[slot] = self.sev[last]
        self.terms.pop()
        self.sev.pop()

    def overwrite(self, slot: int, t: Term) -> None:
        """Replace a term in place, touching only the changed index entries."""
        old = self.sev[slot]
        new = seven_list(*t)
        for x in old:
            if x not in new:
                self._unlink(x, slot)
        for x in new:
            if x not in old:
                self._link(x, slot)
        self.terms[slot] = t
        self.sev[slot] = new

    def rank(self) -> int:
        return len(self.terms)

    # -- moves ----------------------------------------------------------------

    def _rep(self, s, z: int) -> tuple[int, int]:
        rand = self.rand
        while True:
            a = s[int(rand() * 7)]
            if a != z:
                break
        az = a ^ z
        while True:
            b = s[int(rand() * 7)]
            if b != z and b != a and b != az:
                return a, b

    def _partner(self, slot: int) -> tuple[int, int]:
        """Another slot sharing >= 3 seven-set elements with slot, or (-1, 0)."""
        counts: dict[int, int] = {}
        index = self.index
        for x in self.sev[slot]:
            lst = index[x]
            if len(lst) > 1:
                for q in lst:
                    counts[q] = counts.get(q, 0) + 1
        for q, c in counts.items():
            if c >= 3 and q != slot:
                return q, c
        return -1, 0

    def settle(self, slot: int) -> None:
        """Apply immediate reductions involving slot until none remain."""
        while True:
            q, c = self._partner(slot)
            if q < 0:
                return
            if c == 7:
                self._drop_pair(slot, q)
                return
            s, other = self.sev[slot], self.sev[q]
            common = [x for x in s if x in other]
            a, b = common[0], common[1]
            plane = (a, b, a ^ b)
            w1 = next(x for x in s if x not in plane)
            w2 = next(x for x in other if x not in plane)
            w = w1 ^ w2
            if w == 0 or w in plane:
                self._drop_pair(slot, q)
                return
            self.overwrite(slot, (a, b, w))
            if q == len(self.terms) - 1:
                self.remove(q)
            else:
                # slot may be the last one, which remove() relocates into q.
                last = len(self.terms) - 1
                self.remove(q)
                if slot == last:
                    slot = q

    def _drop_pair(self, s1: int, s2: int) -> None:
        for q in sorted((s1, s2), reverse=True):
            self.remove(q)

    def flip(self) -> bool:
        shared = self.shared
        if not shared:
            return False
        rand = self.rand
        z = shared[int(rand() * len(shared))]
        lst = self.index[z]
        k = len(lst)
        i = int(rand() * k)
        j = int(rand() * (k - 1))
        if j >= i:
            j += 1
        q1, q2 = lst[i], lst[j]
        u1, v1 = self._rep(self.sev[q1], z)
        u2, v2 = self._rep(self.sev[q2], z)
        a = u1 ^ u2
        b = v1 ^ v2
        ok1 = a not in (0, v1, z, v1 ^ z)
        ok2 = b not in (0, u2, z, u2 ^ z)
        if ok1:
            self.overwrite(q1, (a, v1, z))
        if ok2:
            self.overwrite(q2, (u2, b, z))
        if not ok1 or not ok2:
            if not ok1 and not ok2:
                self._drop_pair(q1, q2)
                return True
            dead, live = (q1, q2) if not ok1 else (q2, q1)
            if live == len(self.terms) - 1:
                live = dead
            self.remove(dead)
            self.settle(live)
            return True
        # q2 may move if settling q1 removes terms; track it via its term.
        t2 = self.terms[q2]
        self.settle(q1)
        if q2 < len(self.terms) and self.terms[q2] is t2:
            self.settle(q2)
        else:
            for q in range(len(self.terms)):
                if self.terms[q] is t2:
                    self.settle(q)
                    break
        return True

    def plus(self, attempts: int = 50) -> bool:
        rng = self.rng
        if len(self.terms) < 2:
            return False
        for _ in range(attempts):
            q1, q2 = sample_pair(range(len(self.terms)), rng)
            s1, s2 = self.sev[q1], self.sev[q2]
            if set(s1).isdisjoint(s2):
                break
        else:
            return False
        w1 = s1[rng.randrange(7)]
        u1, v1 = self._rep(s1, w1)
        w2 = s2[rng.randrange(7)]
        u2, v2 = self._rep(s2, w2)
        self._drop_pair(q1, q2)
        for t in ((u1 ^ u2, v1, w1), (u2, v1 ^ v2, w2), (u2, v1, w1 ^ w2)):
            self.settle(self.add(t))
        return True


def random_walk(
    d: CpDecomposition, params: WalkParams, rng: random.Random
) -> tuple[CpDecomposition | None, int]:
    """Walk from d until the rank drops below its start; (result, steps).

    Every sge_interval steps a quadratic-form pass is tried on a copy and
    kept if it lowers the rank.  After ``plateau`` steps without a new low,
    one plus move is allowed (rank at most start + 1).
    """
    start = d.rank
    w = _Walker(d.terms, rng)
    if w.rank() < start:
        # Merges applied while indexing the start already lower the rank.
        return CpDecomposition(d.n, tuple(w.terms)), 0
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
            return CpDecomposition(d.n, tuple(w.terms)), step
        if step % params.sge_interval == 0:
            red = sge_pass_greedy(CpDecomposition(d.n, tuple(w.terms)))
            if red.rank < start:
                return red, step
            if red.rank < r:
                w = _Walker(red.terms, rng)
        if stagnant >= params.plateau and w.rank() <= start:
            w.plus()
            stagnant = 0
    return None, params.walk_limit


def fgs_search(
    c: CubicTensor,
    init: CpDecomposition,
    params: WalkParams = WalkParams(),
) -> tuple[Pool, SearchLog]:
    """Pool-based flip-graph descent from a verified decomposition of c."""
    if not c.is_cubic:
        raise ValueError("flip-graph search takes a pure cubic tensor")
    if not verify(init, c):
        raise ValueError("initial decomposition does not reproduce the tensor")
    pool, log = pool_search(init, random_walk, lambda d: d.key(), lambda d: d.rank, params)
    return pool, log


def best_decomposition(pool: Pool) -> CpDecomposition:
    """Deterministic representative of a pool: smallest key."""
    return min(pool.members, key=lambda d: d.key())

