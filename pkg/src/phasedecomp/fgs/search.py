"""Pool-based descent over flip-graph rank levels, shared by both modes."""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Sequence

import numpy as np


@dataclass(frozen=True)
class WalkParams:
    pool_size: int = 1000  # S
    walk_limit: int = 1_000_000  # L
    plateau: int = 50_000  # P
    sge_interval: int = 10_000  # R
    seed: int = 0
    threads: int = 1
    # A pool pass is at least this many walks, so tiny pools are not
    # abandoned after a single unlucky walk.
    min_pass: int = 8
    # Stop once this rank is reached (None: descend as far as possible).
    target_rank: int | None = None
    # Optional global budgets; None means unlimited.
    max_walks: int | None = None
    time_limit: float | None = None

    def __post_init__(self):
        for name in ("pool_size", "walk_limit", "plateau", "sge_interval", "threads", "min_pass"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class Pool:
    rank: int
    members: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class SearchLog:
    rows: list[tuple[int, int, int, float]] = field(default_factory=list)  # rank, walks, steps, seconds

    def add(self, rank: int, walks: int, steps: int, seconds: float) -> None:
        self.rows.append((rank, walks, steps, seconds))


def walk_seed_stream(seed: int) -> np.random.Generator:
    """Counter-based master stream; each walk draws its own 64-bit seed from it."""
    return np.random.Generator(np.random.Philox(seed))


def _run_walk(args):
    walk_fn, start, params, wseed = args
    rng = random.Random(wseed)
    return walk_fn(start, params, rng)


def pool_search(
    init,
    walk_fn: Callable[[Any, WalkParams, random.Random], tuple[Any, int]],
    key_fn: Callable[[Any], Hashable],
    rank_fn: Callable[[Any], int],
    params: WalkParams,
) -> tuple[Pool, SearchLog]:
    """Descend rank levels with random walks from a pool of equal-rank members.

    ``walk_fn(start, params, rng)`` returns (lower-rank result or None, steps).
    Successes at the lowest rank seen so far fill the next-level pool; the
    search advances when that pool holds ``pool_size`` members, or after as
    many consecutive walks without a new member as the pool has members
    (at least ``min_pass``).
    It stops when such a stretch ends with the next-level pool still empty.
    """
    master = walk_seed_stream(params.seed)
    t0 = time.perf_counter()
    log = SearchLog()
    pool = Pool(rank_fn(init), [init])
    log.add(pool.rank, 0, 0, 0.0)
    nxt: dict[Hashable, Any] = {}
    nxt_rank = pool.rank
    failures = walks = steps = 0
    executor = ProcessPoolExecutor(params.threads) if params.threads > 1 else None

    def done() -> bool:
        if params.target_rank is not None and pool.rank <= params.target_rank:
            return True
        if params.max_walks is not None and walks >= params.max_walks:
            return True
        if params.time_limit is not None and time.perf_counter() - t0 >= params.time_limit:
            return True
        return False

    try:
        while pool.members and not done():
            batch = []
            for _ in range(params.threads):
                member = pool.members[int(master.integers(len(pool.members)))]
                batch.append((walk_fn, member, params, int(master.integers(1 << 63))))
            if executor is None:
                results = [_run_walk(b) for b in batch]
            else:
                results = list(executor.map(_run_walk, batch))
            for res, nsteps in results:
                walks += 1
                steps += nsteps
                if res is None:
                    failures += 1
                    continue
                r = rank_fn(res)
                if r < nxt_rank:
                    nxt = {}
                    nxt_rank = r
                key = key_fn(res)
                if r == nxt_rank and key not in nxt:
                    nxt[key] = res
                    failures = 0
                else:
                    # Repeats and higher-rank successes add nothing new.
                    failures += 1
            stretch = max(len(pool.members), params.min_pass)
            if len(nxt) >= params.pool_size or (nxt and failures >= stretch):
                pool = Pool(nxt_rank, list(nxt.values())[: params.pool_size])
                log.add(pool.rank, walks, steps, time.perf_counter() - t0)
                nxt = {}
                failures = 0
            elif failures >= stretch:
                break
    finally:
        if executor is not None:
            executor.shutdown()
    log.add(pool.rank, walks, steps, time.perf_counter() - t0)
    return pool, log


def sample_pair(items: Sequence[int], rng: random.Random) -> tuple[int, int]:
    i = rng.randrange(len(items))
    j = rng.randrange(len(items) - 1)
    if j >= i:
        j += 1
    return items[i], items[j]
