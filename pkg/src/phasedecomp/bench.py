"""Planted instances, brute-force rank oracles and the experiment grid runner."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import f2core
from .bco import bco_beam, bco_greedy, pull_back
from .cpdecomp import (
    CpDecomposition,
    CubicTensor,
    cubic_of,
    standard_decomposition,
    trivector,
    verify,
)
from .fgs.search import WalkParams
from .fgs.symmetric import best_decomposition, fgs_search
from .phasepoly import PhasePolynomial, signature_of_rows
from .sge import sge_pass_beam, sge_pass_greedy

CSV_COLUMNS = ("n", "r_pl", "seed", "method", "rank", "monomials", "time_ms", "verified")


# ---------------------------------------------------------------------------
# Planted instances
# ---------------------------------------------------------------------------


def _generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.Philox(int(rng)))


def planted(n: int, r_pl: int, rng) -> tuple[CubicTensor, CpDecomposition]:
    """Random factor rows (u_q, v_q, w_q); dependent triples are redrawn."""
    if n < 3:
        raise ValueError("planted instances need n >= 3")
    if r_pl < 0:
        raise ValueError("r_pl must be non-negative")
    g = _generator(rng)
    terms = []
    while len(terms) < r_pl:
        bits = g.integers(0, 2, size=(3, n))
        u, v, w = (sum(int(b) << i for i, b in enumerate(row)) for row in bits)
        if f2core.is_independent(u, v, w):
            terms.append((u, v, w))
    d = CpDecomposition(n, tuple(terms))
    return cubic_of(d), d


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def _triple_index(n: int) -> dict[tuple[int, int, int], int]:
    return {t: k for k, t in enumerate(combinations(range(n), 3))}


def _subspaces3(n: int) -> list[tuple[int, int, int]]:
    seen = set()
    for u in range(1, 1 << n):
        for v in range(u + 1, 1 << n):
            for w in range(v + 1, 1 << n):
                if f2core.is_independent(u, v, w):
                    seen.add(f2core.rref_basis((u, v, w)))
    return sorted(seen)


@lru_cache(maxsize=None)
def _cp_distances(n: int) -> np.ndarray:
    """BFS distance from 0 to every cubic tensor, steps = rank-1 trivectors."""
    idx = _triple_index(n)
    gens = set()
    for t in _subspaces3(n):
        mask = 0
        for tri in trivector(*t):
            mask |= 1 << idx[tri]
        if mask:
            gens.add(mask)
    return _bfs(len(idx), sorted(gens))


def _bfs(bits: int, gens: list[int]) -> np.ndarray:
    size = 1 << bits
    dist = np.full(size, -1, dtype=np.int16)
    dist[0] = 0
    frontier = np.array([0], dtype=np.int64)
    g = np.array(gens, dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        nxt = (frontier[:, None] ^ g[None, :]).reshape(-1)
        nxt = np.unique(nxt)
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = level
        frontier = nxt
    return dist


def cp_rank_oracle(c: CubicTensor, max_r: int = 3) -> int | None:
    """Exact CP rank by breadth-first search over all tensors (n <= 5)."""
    if c.n > 5:
        raise ValueError("cp_rank_oracle supports n <= 5")
    if not c.is_cubic:
        raise ValueError("oracle takes a pure cubic tensor")
    idx = _triple_index(c.n)
    mask = 0
    for t in c.C:
        mask |= 1 << idx[t]
    r = int(_cp_distances(c.n)[mask])
    return r if r <= max_r else None


def _sig_layout(n: int):
    pairs = list(combinations(range(n), 2))
    triples = list(combinations(range(n), 3))
    off_q = n
    off_c = n + len(pairs)
    pos = {("L", (i,)): i for i in range(n)}
    pos.update({("Q", p): off_q + k for k, p in enumerate(pairs)})
    pos.update({("C", t): off_c + k for k, t in enumerate(triples)})
    return pos, off_c + len(triples)


def _sig_mask(p: PhasePolynomial, pos) -> int:
    m = 0
    for i in p.L:
        m |= 1 << pos[("L", (i,))]
    for q in p.Q:
        m |= 1 << pos[("Q", q)]
    for t in p.C:
        m |= 1 << pos[("C", t)]
    return m


@lru_cache(maxsize=None)
def _waring_distances(n: int) -> np.ndarray:
    pos, bits = _sig_layout(n)
    gens = [_sig_mask(signature_of_rows([a], n), pos) for a in range(1, 1 << n)]
    return _bfs(bits, gens)


def waring_rank_oracle(p: PhasePolynomial, max_r: int = 15) -> int | None:
    """Fewest parities whose signature equals p, by exhaustive search (n <= 4)."""
    if p.n > 4:
        raise ValueError("waring_rank_oracle supports n <= 4")
    pos, _ = _sig_layout(p.n)
    r = int(_waring_distances(p.n)[_sig_mask(p, pos)])
    return r if r <= max_r else None


# ---------------------------------------------------------------------------
# Experiment grid
# ---------------------------------------------------------------------------

METHODS = ("bco", "bco+sge", "bco+sge+fgs")


@dataclass
class ExperimentSpec:
    n: list[int] = field(default_factory=list)
    r_pl: list[int] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    bco: str = "beam"
    bco_width: int = 64
    sge: str = "greedy"
    pool: int = 50
    walk: int = 20_000
    plateau: int = 2_000
    sge_every: int = 1_000
    timing: bool = False


def _int_list(text: str) -> list[int]:
    out: list[int] = []
    for part in text.replace(",", " ").split():
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def parse_spec(text: str) -> ExperimentSpec:
    """Key-value lines ``key = value``; ``#`` starts a comment.

    Integer lists accept commas, spaces and inclusive ranges ``a..b``.
    """
    spec = ExperimentSpec()
    lists = {"n", "r_pl", "seeds"}
    ints = {"bco_width", "pool", "walk", "plateau", "sge_every"}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in lists:
                setattr(spec, key, _int_list(value))
            elif key in ints:
                setattr(spec, key, int(value))
            elif key == "methods":
                ms = [m.strip() for m in value.replace(",", " ").split()]
                bad = [m for m in ms if m not in METHODS]
                if bad:
                    raise ValueError(f"unknown method {bad[0]!r}")
                spec.methods = ms
            elif key in ("bco", "sge"):
                if value not in ("greedy", "beam"):
                    raise ValueError(f"{key} must be greedy or beam")
                setattr(spec, key, value)
            elif key == "timing":
                spec.timing = value.lower() in ("1", "true", "yes", "on")
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
    return spec


def point_seed(seed: int, n: int, r_pl: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, n, r_pl])


@dataclass
class PipelineResult:
    method: str
    decomposition: CpDecomposition
    monomials: int
    seconds: float


def run_pipeline(
    c: CubicTensor, methods, spec: ExperimentSpec, seed: int
) -> list[PipelineResult]:
    """Run BCO, then SGE, then FGS, reporting after each requested stage."""
    out: list[PipelineResult] = []
    t0 = time.perf_counter()
    b = bco_beam(c, spec.bco_width) if spec.bco == "beam" else bco_greedy(c)
    monomials = len(b.poly.C)
    d = pull_back(standard_decomposition(b.poly.cubic_part()), b.transform)
    if "bco" in methods:
        out.append(PipelineResult("bco", d, monomials, time.perf_counter() - t0))
    if not any(m.startswith("bco+sge") for m in methods):
        return out
    d = sge_pass_beam(d) if spec.sge == "beam" else sge_pass_greedy(d)
    if "bco+sge" in methods:
        out.append(PipelineResult("bco+sge", d, monomials, time.perf_counter() - t0))
    if "bco+sge+fgs" in methods:
        params = WalkParams(
            pool_size=spec.pool,
            walk_limit=spec.walk,
            plateau=spec.plateau,
            sge_interval=spec.sge_every,
            seed=seed,
        )
        pool, _ = fgs_search(c, d, params)
        best = best_decomposition(pool)
        if best.rank > d.rank:
            best = d
        out.append(PipelineResult("bco+sge+fgs", best, monomials, time.perf_counter() - t0))
    return out


def run_experiment(spec: ExperimentSpec | str) -> str:
    """CSV text with one row per (instance, method)."""
    if isinstance(spec, str):
        spec = parse_spec(spec)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for n in spec.n:
        for r_pl in spec.r_pl:
            for seed in spec.seeds:
                ss = point_seed(seed, n, r_pl)
                inst_seed, walk_seed = (int(s.generate_state(1, np.uint64)[0]) for s in ss.spawn(2))
                c, _ = planted(n, r_pl, inst_seed)
                for res in run_pipeline(c, spec.methods, spec, walk_seed):
                    ok = verify(res.decomposition, c)
                    ms = f"{res.seconds * 1000:.0f}" if spec.timing else ""
                    w.writerow(
                        (n, r_pl, seed, res.method, res.decomposition.rank, res.monomials, ms, int(ok))
                    )
    return buf.getvalue()
