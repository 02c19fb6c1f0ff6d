"""Basis change optimization: greedy and beam search over x_i <- x_i + x_j.

The search runs on dense 0/1 arrays (L: n, Q: n x n, C: n x n x n, all fully
symmetric) so that the cost change of all n(n-1) substitutions is one batch
of matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import f2core
from .cpdecomp import CpDecomposition
from .phasepoly import UNITARY, CostModel, PhasePolynomial, cost, substitute

_BIG = 1 << 40


@dataclass(frozen=True)
class BcoResult:
    poly: PhasePolynomial
    transform: f2core.F2Matrix  # E = M_1 M_2 ... M_k; result(x) = input(E x)
    trace: tuple[tuple[int, int], ...] = field(default=())

    def cost(self, m: CostModel = UNITARY) -> int:
        return cost(self.poly, m)


# ---------------------------------------------------------------------------
# Dense state
# ---------------------------------------------------------------------------


def to_dense(p: PhasePolynomial) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = p.n
    L = np.zeros(n, dtype=np.int8)
    Q = np.zeros((n, n), dtype=np.int8)
    C = np.zeros((n, n, n), dtype=np.int8)
    for i in p.L:
        L[i] = 1
    for i, j in p.Q:
        Q[i, j] = Q[j, i] = 1
    for i, j, k in p.C:
        for a, b, c in ((i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)):
            C[a, b, c] = 1
    return L, Q, C


def from_dense(L: np.ndarray, Q: np.ndarray, C: np.ndarray) -> PhasePolynomial:
    n = len(L)
    Ls = frozenset(int(i) for i in np.flatnonzero(L))
    iu, ju = np.nonzero(np.triu(Q, 1))
    Qs = frozenset(zip(iu.tolist(), ju.tolist()))
    idx = np.argwhere(C)
    Cs = frozenset(
        tuple(t) for t in idx[(idx[:, 0] < idx[:, 1]) & (idx[:, 1] < idx[:, 2])].tolist()
    )
    return PhasePolynomial(n, Ls, Qs, Cs)


def apply_dense(L, Q, C, i: int, j: int):
    """Dense version of phasepoly.substitute; returns new arrays."""
    L2, Q2, C2 = L.copy(), Q.copy(), C.copy()
    M = C[i].copy()
    M[j, :] = 0
    M[:, j] = 0
    C2[j, :, :] ^= M
    C2[:, j, :] ^= M
    C2[:, :, j] ^= M
    v = Q[i].copy()
    v[j] = 0
    C2[i, j, :] ^= v
    C2[j, i, :] ^= v
    C2[i, :, j] ^= v
    C2[j, :, i] ^= v
    C2[:, i, j] ^= v
    C2[:, j, i] ^= v
    Q2[j, :] ^= v
    Q2[:, j] ^= v
    if L[i]:
        Q2[i, j] ^= 1
        Q2[j, i] ^= 1
        L2[j] ^= 1
    return L2, Q2, C2


def delta_matrix(Ls, Qs, Cs, m: CostModel) -> np.ndarray:
    """Cost change of every substitution for a batch of states.

    Ls: (k, n), Qs: (k, n, n), Cs: (k, n, n, n).  Entry [s, i, j] is the cost
    change of x_i <- x_i + x_j applied to state s; the diagonal is huge.
    """
    L = Ls.astype(np.int64)
    Q = Qs.astype(np.int64)
    C = Cs.astype(np.int64)
    k, n = L.shape
    rowQ = Q.sum(-1)
    QQ = Q @ Q.transpose(0, 2, 1)
    F = C.reshape(k, n, n * n)
    FF = F @ F.transpose(0, 2, 1)
    S = C.sum(-1)
    tot = S.sum(-1)
    QC = np.einsum("kia,kija->kij", Q, C)
    dL = L[:, :, None] * (1 - 2 * L[:, None, :])
    dQ = rowQ[:, :, None] - Q - 2 * QQ + L[:, :, None] * (1 - 2 * Q)
    dC = (tot[:, :, None] - 2 * S) // 2 - FF + rowQ[:, :, None] - Q - 2 * QC
    d = m.c1 * dL + m.c2 * dQ + m.c3 * dC
    d[:, np.arange(n), np.arange(n)] = _BIG
    return d


def _dense_cost(L, Q, C, m: CostModel) -> int:
    return int(m.c1 * L.sum() + m.c2 * Q.sum() // 2 + m.c3 * C.sum() // 6)


def _compose(E: tuple[int, ...], i: int, j: int) -> tuple[int, ...]:
    # E <- E M with M = I + e_i e_j^T: column j gains column i.
    bi, bj = 1 << i, 1 << j
    return tuple(r ^ bj if r & bi else r for r in E)


def _result(p: PhasePolynomial, E, trace) -> BcoResult:
    return BcoResult(p, f2core.F2Matrix(p.n, tuple(E)), tuple(trace))


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------


def bco_greedy(p: PhasePolynomial, m: CostModel = UNITARY) -> BcoResult:
    """Apply the best strictly improving substitution until none exists.

    Ties go to the lexicographically smallest (i, j).
    """
    n = p.n
    E = tuple(1 << k for k in range(n))
    trace: list[tuple[int, int]] = []
    if n < 2:
        return _result(p, E, trace)
    L, Q, C = to_dense(p)
    while True:
        d = delta_matrix(L[None], Q[None], C[None], m)[0]
        flat = int(np.argmin(d))
        if d.flat[flat] >= 0:
            break
        i, j = divmod(flat, n)
        L, Q, C = apply_dense(L, Q, C, i, j)
        E = _compose(E, i, j)
        trace.append((i, j))
    return _result(from_dense(L, Q, C), E, trace)


def _key(L, Q, C) -> bytes:
    return np.packbits(L).tobytes() + np.packbits(Q).tobytes() + np.packbits(C).tobytes()


def bco_beam(
    p: PhasePolynomial,
    width: int = 1 << 10,
    m: CostModel = UNITARY,
    patience: int | None = None,
    chunk: int = 64,
) -> BcoResult:
    """Beam search over substitution sequences.

    Each step expands every pool member by all substitutions and keeps the
    ``width`` cheapest unseen children (ties: pool position, then (i, j)).
    Stops after ``patience`` (default 10 n) steps without a new best.  The
    greedy descent result seeds the incumbent, so the result never costs
    more than bco_greedy.
    """
    if width < 1:
        raise ValueError("beam width must be >= 1")
    greedy = bco_greedy(p, m)
    n = p.n
    if n < 2:
        return greedy
    patience = 10 * n if patience is None else patience
    best = greedy
    best_cost = cost(greedy.poly, m)
    L, Q, C = to_dense(p)
    E0 = tuple(1 << k for k in range(n))
    pool = [(L, Q, C, E0, ())]
    seen = {_key(L, Q, C)}
    costs = [_dense_cost(L, Q, C, m)]
    stale = 0
    while pool and stale < patience:
        cand = []
        for start in range(0, len(pool), chunk):
            part = pool[start:start + chunk]
            d = delta_matrix(
                np.stack([s[0] for s in part]),
                np.stack([s[1] for s in part]),
                np.stack([s[2] for s in part]),
                m,
            )
            base = np.array(costs[start:start + chunk])[:, None, None]
            cand.append(base + d)
        allc = np.concatenate(cand).reshape(-1)
        order = np.argsort(allc, kind="stable")
        new_pool, new_costs = [], []
        improved = False
        for flat in order:
            c = int(allc[flat])
            if c >= _BIG // 2:
                break
            pos, rem = divmod(int(flat), n * n)
            i, j = divmod(rem, n)
            Lp, Qp, Cp, Ep, tp = pool[pos]
            L2, Q2, C2 = apply_dense(Lp, Qp, Cp, i, j)
            k = _key(L2, Q2, C2)
            if k in seen:
                continue
            seen.add(k)
            child = (L2, Q2, C2, _compose(Ep, i, j), tp + ((i, j),))
            new_pool.append(child)
            new_costs.append(c)
            if c < best_cost:
                best_cost = c
                best = _result(from_dense(L2, Q2, C2), child[3], child[4])
                improved = True
            if len(new_pool) >= width:
                break
        pool, costs = new_pool, new_costs
        stale = 0 if improved else stale + 1
    return best


# ---------------------------------------------------------------------------
# Replay and pull-back
# ---------------------------------------------------------------------------


def replay(p: PhasePolynomial, trace) -> PhasePolynomial:
    for i, j in trace:
        p = substitute(p, i, j)
    return p


def trace_matrix(n: int, trace) -> list[int]:
    """Product of the elementary matrices of a trace, in order."""
    E = [1 << k for k in range(n)]
    for i, j in trace:
        E = f2core.matmul(E, _elementary(n, i, j))
    return E


def _elementary(n: int, i: int, j: int) -> list[int]:
    rows = [1 << k for k in range(n)]
    rows[i] |= 1 << j
    return rows


def pull_back(d: CpDecomposition, transform: f2core.F2Matrix) -> CpDecomposition:
    """Map a decomposition of f(E x) to one of f: factors become E^{-T} u."""
    n = d.n
    inv = f2core.inverse(transform.rows, n)
    inv_t = f2core.transpose(inv, n)
    return CpDecomposition(
        n, tuple(tuple(f2core.mat_vec(inv_t, x) for x in t) for t in d.terms)
    )
