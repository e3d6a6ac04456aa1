"""Chunked execution: overlapping chunks searched independently, then merged.

Chunk ``i`` covers ``[b_i - s_max, b_{i+1})`` with ``b_i = i * n // n_p``, so
any window up to ``s_max`` long that straddles a boundary lies entirely in
the chunk to its right. Workers share nothing; each gets its own slice and
its own random stream. The merge keeps the highest normalized MI windows
greedily and drops whatever overlaps them.
"""

from __future__ import annotations

import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .bottomup import run_bu
from .core import (
    ConfigError,
    CorrelatedWindow,
    ResultSet,
    SearchParams,
    SearchStats,
    SycosError,
    TimeSeriesPair,
    Window,
)
from .selector import SelectionReport, select
from .topdown import run_td


class ChunkError(SycosError, RuntimeError):
    def __init__(self, chunk_id: int, cause: BaseException):
        super().__init__(f"chunk {chunk_id} failed: {cause!r}")
        self.chunk_id = chunk_id


@dataclass(frozen=True)
class ChunkPlan:
    chunks: tuple[Window, ...]
    bounds: tuple[int, ...]


def plan_chunks(n: int, n_p: int, s_max: int) -> ChunkPlan:
    if n_p < 1:
        raise ConfigError("n_p must be at least 1")
    if n_p > n:
        raise ConfigError(f"cannot split {n} samples into {n_p} chunks")
    if n_p > 1 and n // n_p < s_max:
        warnings.warn(f"chunks of ~{n // n_p} samples are shorter than s_max={s_max}", stacklevel=2)
    bounds = tuple(i * n // n_p for i in range(n_p + 1))
    chunks = tuple(Window(max(0, bounds[i] - s_max), bounds[i + 1]) for i in range(n_p))
    return ChunkPlan(chunks, bounds)


@dataclass
class ParallelResult:
    results: ResultSet
    chunk_stats: list[SearchStats]
    method: str
    plan: ChunkPlan
    selection: Optional[SelectionReport] = None
    stats: SearchStats = field(default_factory=SearchStats)


def _search(pair: TimeSeriesPair, params: SearchParams, method: str, noise_pruning: bool,
            incremental: bool, stream: int):
    if method == "TD":
        return run_td(pair, params, noise_pruning=noise_pruning, incremental=incremental)
    return run_bu(pair, params, noise_pruning=noise_pruning, incremental=incremental, stream=stream)


def _run_chunk(args):
    chunk_id, x, y, offset, params, method, noise_pruning, incremental = args
    sub = TimeSeriesPair(x, y)
    res = _search(sub, params, method, noise_pruning, incremental, chunk_id)
    found = [(c.start + offset, c.end + offset, c.mi, c.normalized_mi, c.method)
             for c in res.results]
    return chunk_id, found, res.stats


def merge(found: list[CorrelatedWindow]) -> ResultSet:
    """Greedy dedup: highest normalized MI first, ties by position; result sorted."""
    order = sorted(found, key=lambda c: (-c.normalized_mi, c.start, c.end))
    rs = ResultSet()
    for c in order:
        if not rs.conflicts(c.window):
            rs.insert(c)
    return rs


def run_parallel(pair: TimeSeriesPair, params: SearchParams, method: str = "Auto", n_p: int = 1,
                 workers: int = 1, noise_pruning: bool = True, incremental: bool = True
                 ) -> ParallelResult:
    """Search every chunk with ``method`` (TD, BU or Auto) and merge the results."""
    n = len(pair)
    params.validate(n)
    method = method.upper() if method.lower() != "auto" else "Auto"
    if method not in ("TD", "BU", "Auto"):
        raise ConfigError(f"unknown method {method!r}")
    t0 = time.perf_counter()
    selection = None
    if method == "Auto":
        selection = select(pair, params, noise_pruning, incremental)
        method = selection.chosen

    if n_p == 1:
        res = _search(pair, params, method, noise_pruning, incremental, 0)
        stats = res.stats
        stats.runtime_s = time.perf_counter() - t0
        return ParallelResult(res.results, [res.stats], method, plan_chunks(n, 1, 0),
                              selection, stats)

    s_max = params.resolved_s_max(n)
    plan = plan_chunks(n, n_p, s_max)
    jobs = [(i, pair.x[w.start:w.end].copy(), pair.y[w.start:w.end].copy(), w.start,
             params.with_(s_max=min(s_max, w.size)), method, noise_pruning, incremental)
            for i, w in enumerate(plan.chunks)]
    outputs = {}
    if workers <= 1:
        for job in jobs:
            try:
                cid, found, st = _run_chunk(job)
            except Exception as exc:
                raise ChunkError(job[0], exc) from exc
            outputs[cid] = (found, st)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_run_chunk, job): job[0] for job in jobs}
            for fut, cid in futures.items():
                try:
                    _, found, st = fut.result()
                except Exception as exc:
                    raise ChunkError(cid, exc) from exc
                outputs[cid] = (found, st)

    all_found = []
    chunk_stats = []
    total = SearchStats()
    for cid in sorted(outputs):
        found, st = outputs[cid]
        chunk_stats.append(st)
        total = total.merge(st)
        all_found.extend(CorrelatedWindow(Window(s, e), mi, nmi, m) for s, e, mi, nmi, m in found)
    total.runtime_s = time.perf_counter() - t0
    return ParallelResult(merge(all_found), chunk_stats, method, plan, selection, total)
