"""Bottom-up search by late-acceptance hill climbing over window boundaries.

A climb starts from the smallest window at the lowest unexplored index and
moves its start and end by ``delta``. A move is accepted when the best
neighbor beats the current MI or a randomly drawn entry of a short history
of past values. After ``t_max_idle`` consecutive rejections the climb stops,
its window is kept if it reaches the threshold, and the next climb begins
further right.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    CorrelatedWindow,
    ResultSet,
    SearchParams,
    SearchStats,
    TimeSeriesPair,
    Window,
)
from .engine import Evaluator, SearchResult
from .noise import check_noise

DIRECTIONS = ("left", "right")


def stream_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for one chunk; stream 0 is the sequential run."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))


@dataclass
class LahcState:
    current: Window
    current_mi: float
    history: list[float]
    idle: int = 0
    rng: Optional[np.random.Generator] = None
    streaks: dict = field(default_factory=lambda: {d: 0 for d in DIRECTIONS})
    pruned: set = field(default_factory=set)
    last_best: Optional[float] = None
    iterations: int = 0
    moves: int = 0


def neighborhood(w: Window, delta: int, lo: int, hi: int, s_min: int, s_max: int,
                 pruned: frozenset | set = frozenset()) -> list[Window]:
    """Valid delta-neighbors of ``w`` inside ``[lo, hi)``, sorted by (start, end)."""
    out = []
    for ds in (-delta, 0, delta):
        if ds < 0 and "left" in pruned:
            continue
        for de in (-delta, 0, delta):
            if ds == 0 and de == 0:
                continue
            if de > 0 and "right" in pruned:
                continue
            s = w.start + ds
            e = w.end + de
            if s < lo or e > hi or not (s_min <= e - s <= s_max):
                continue
            out.append(Window(s, e))
    out.sort()
    return out


def bu_prune_direction(state: LahcState, direction: str, pair: TimeSeriesPair,
                       params: SearchParams, delta: int,
                       evaluator: Optional[Evaluator] = None) -> LahcState:
    """Test the ``delta`` extension of the current window in one direction.

    Noise bumps the direction's streak; at ``p`` the direction is dropped from
    later neighborhoods of this climb. A clean verdict resets the streak.
    """
    w = state.current
    if direction == "left":
        if w.start - delta < 0:
            return state
        ext = Window(w.start - delta, w.start)
    elif direction == "right":
        if w.end + delta > len(pair):
            return state
        ext = Window(w.end, w.end + delta)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if ext.size <= params.k or w.size <= params.k:
        return state
    v = check_noise(pair, w, ext, params.tau, params.k, evaluator)
    if v.is_noise:
        state.streaks[direction] += 1
        if state.streaks[direction] >= params.p and direction not in state.pruned:
            state.pruned.add(direction)
            if evaluator is not None:
                evaluator.stats.prune_events += 1
    else:
        state.streaks[direction] = 0
    return state


def climb(ev: Evaluator, pair: TimeSeriesPair, params: SearchParams, lo: int, hi: int,
          rng: np.random.Generator, noise_pruning: bool, max_iter: int = 100_000) -> LahcState:
    """One LAHC climb restricted to ``[lo, hi)`` starting at ``[lo, lo + s_min)``."""
    delta = params.bu_step()
    s_max = min(params.resolved_s_max(len(pair)), hi - lo)
    w0 = Window(lo, lo + params.s_min)
    cur = ev.evaluate(w0).mi_raw
    st = LahcState(w0, cur, [cur] * params.h, rng=rng)
    for _ in range(max_iter):
        if st.idle > params.t_max_idle:
            break
        cands = neighborhood(st.current, delta, lo, hi, params.s_min, s_max, st.pruned)
        if not cands:
            st.last_best = None
            break
        ests = ev.evaluate_many(cands)
        best = min(cands, key=lambda c: (-ests[c].mi_raw, c))
        best_mi = ests[best].mi_raw
        st.last_best = best_mi
        ev.stats.windows_visited += len(cands)
        if noise_pruning:
            for d in DIRECTIONS:
                if d not in st.pruned:
                    bu_prune_direction(st, d, pair, params, delta, ev)
        st.iterations += 1
        j = int(rng.integers(params.h))
        if best_mi > st.history[j] or best_mi > st.current_mi:
            st.current, st.current_mi = best, best_mi
            st.idle = 0
            st.moves += 1
        else:
            st.idle += 1
        if st.current_mi > st.history[j]:
            st.history[j] = st.current_mi
    return st


def run_bu(pair: TimeSeriesPair, params: SearchParams, noise_pruning: bool = True,
           incremental: bool = True, stream: int = 0,
           evaluator: Optional[Evaluator] = None) -> SearchResult:
    n = len(pair)
    params.validate(n)
    stats = SearchStats() if evaluator is None else evaluator.stats
    ev = evaluator if evaluator is not None else Evaluator(pair, params.k, incremental, stats)
    rng = stream_rng(params.seed, stream)
    t0 = time.perf_counter()
    rs = ResultSet()
    explored: list[Window] = []
    climbs = []
    lo = 0
    while n - lo >= params.s_min:
        st = climb(ev, pair, params, lo, n, rng, noise_pruning)
        stats.climbs += 1
        est = ev.evaluate(st.current)
        accepted = est.normalized >= params.sigma
        if accepted:
            rs.insert(CorrelatedWindow(st.current, est.mi_nats, est.normalized, "BU"))
        climbs.append({"start": lo, "final": st.current, "accepted": accepted,
                       "current_mi": st.current_mi, "history": list(st.history),
                       "last_best": st.last_best, "pruned": sorted(st.pruned),
                       "iterations": st.iterations, "moves": st.moves})
        nxt = max(st.current.end if accepted else lo, lo + params.s_min)
        explored.append(Window(lo, max(nxt, st.current.end)))
        lo = nxt
    if lo < n:
        # too short to hold any window, so nothing is left to climb
        explored.append(Window(lo, n))
    stats.runtime_s += time.perf_counter() - t0
    return SearchResult(rs, stats, "BU", {"climbs": climbs, "explored": explored, "tail_start": lo})
