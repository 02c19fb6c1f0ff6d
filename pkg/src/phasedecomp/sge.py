"""Quadratic-form reduction over a shared seven-set element.

All terms whose span contains z are rewritten as (u_q, v_q, z); their sum is
z times the 2-form sum u_q ^ v_q, and symplectic elimination of that form
gives the minimal number of terms over z.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable

from . import f2core
from .cpdecomp import CpDecomposition, Term, representative_with, seven_list
from .f2core import bits_to_str


def collect(d: CpDecomposition, z: int) -> list[int]:
    """Indices of terms whose seven-set contains z."""
    if z == 0:
        raise ValueError("z must be nonzero")
    return [q for q, t in enumerate(d.terms) if z in seven_list(*t)]


def _reduced_pair(t: Term, z: int, zlow: int) -> tuple[int, int]:
    # Adding z to u or v does not change u ^ v ^ z; clearing the pivot
    # coordinate of z works in the quotient by z.
    a, b, _ = representative_with(t, z)
    if a & zlow:
        a ^= z
    if b & zlow:
        b ^= z
    return a, b


def form_over(d: CpDecomposition, z: int, indices: Iterable[int]) -> list[int]:
    """Alternating matrix B = sum (u v^T + v u^T) of the collected terms."""
    zlow = z & -z
    B = [0] * d.n
    for q in indices:
        a, b = _reduced_pair(d.terms[q], z, zlow)
        for i, r in enumerate(f2core.wedge2(a, b, d.n)):
            B[i] ^= r
    return B


def reduced_terms(d: CpDecomposition, z: int, indices: Iterable[int]) -> list[Term]:
    B = form_over(d, z, indices)
    out = []
    for a, b in f2core.alternating_pair_decompose(B):
        if f2core.is_independent(a, b, z):
            out.append((a, b, z))
    return out


def reduce_over(d: CpDecomposition, z: int) -> CpDecomposition:
    """Replace all terms sharing z by the minimal set from the induced 2-form."""
    if z == 0:
        raise ValueError("z must be nonzero")
    idx = collect(d, z)
    if not idx:
        return d
    return d.replace(idx, reduced_terms(d, z, idx))


def reduction_size(d: CpDecomposition, z: int, indices: list[int]) -> int:
    """Number of terms reduce_over would emit for the collected indices."""
    return f2core.rank(form_over(d, z, indices)) // 2


def shared_elements(d: CpDecomposition) -> dict[int, list[int]]:
    """Map from seven-set element to the terms containing it, kept only when shared."""
    index: dict[int, list[int]] = defaultdict(list)
    for q, t in enumerate(d.terms):
        for x in seven_list(*t):
            index[x].append(q)
    return {x: qs for x, qs in index.items() if len(qs) >= 2}


def improving_reductions(d: CpDecomposition) -> list[tuple[int, int, str, list[int]]]:
    """(gain, z, zkey, indices) for every z whose reduction lowers the rank."""
    out = []
    for z, qs in shared_elements(d).items():
        gain = len(qs) - reduction_size(d, z, qs)
        if gain > 0:
            out.append((gain, z, bits_to_str(z, d.n), qs))
    return out


def sge_pass_greedy(d: CpDecomposition) -> CpDecomposition:
    """Repeatedly apply the reduction with the largest rank gain.

    Ties go to the lexicographically smallest z bit string.
    """
    while True:
        cands = improving_reductions(d)
        if not cands:
            return d
        gain, z, _, qs = min(cands, key=lambda c: (-c[0], c[2]))
        d = d.replace(qs, reduced_terms(d, z, qs))


def sge_pass_beam(d: CpDecomposition, width: int = 1 << 10) -> CpDecomposition:
    """Beam search over reduction sequences; returns the lowest rank found."""
    if width < 1:
        raise ValueError("beam width must be >= 1")
    best = d
    pool = [d]
    seen = {d.key()}
    while pool:
        children = []
        for pos, parent in enumerate(pool):
            for gain, z, zkey, qs in improving_reductions(parent):
                children.append((parent.rank - gain, pos, zkey, parent, z, qs))
        children.sort(key=lambda c: c[:3])
        pool = []
        for rank, _, _, parent, z, qs in children:
            child = parent.replace(qs, reduced_terms(parent, z, qs))
            k = child.key()
            if k in seen:
                continue
            seen.add(k)
            pool.append(child)
            if child.rank < best.rank:
                best = child
            if len(pool) >= width:
                break
    return best
