"""Top-down multi-layer sliding-window search.

Each layer slides windows of one size over the spans left uncorrelated by the
layers above it. A window reaching the threshold is kept and the slide jumps
past it; everything else is merged into partitions handed to the next, finer
layer.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import (
    ConfigError,
    CorrelatedWindow,
    ResultSet,
    SearchParams,
    SearchStats,
    TimeSeriesPair,
    Window,
)
from .engine import Evaluator, SearchResult
from .noise import NoiseVerdict, check_noise


@dataclass(frozen=True)
class LayerSchedule:
    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise ConfigError("a schedule needs at least one layer")
        if any(b >= a for a, b in zip(sizes, sizes[1:])):
            raise ConfigError(f"layer sizes must strictly decrease: {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def halving(cls, s_max: int, s_min: int) -> "LayerSchedule":
        """s_max, s_max // 2, ... while the size stays at or above s_min."""
        if s_max < s_min:
            raise ConfigError(f"s_max={s_max} is below s_min={s_min}")
        sizes = []
        s = s_max
        while s >= s_min:
            sizes.append(s)
            s //= 2
        return cls(tuple(sizes))

    def check(self, params: SearchParams, n: int) -> None:
        s_max = params.resolved_s_max(n)
        if self.sizes[0] > s_max or self.sizes[-1] < params.s_min:
            raise ConfigError(f"schedule {self.sizes} leaves [{params.s_min}, {s_max}]")


class TdAction(enum.Enum):
    SHIFT = "shift"
    SKIP = "skip"


def td_noise_step(current: Window, shifted: Window, pair: TimeSeriesPair, params: SearchParams,
                  streak: int, evaluator: Optional[Evaluator] = None
                  ) -> tuple[TdAction, int, Optional[NoiseVerdict]]:
    """Decide whether the slide should skip past ``shifted``.

    ``shifted`` splits into the part it shares with ``current`` and the fresh
    tail. The tail is tested as noise against the shared part; ``p``
    consecutive noise verdicts trigger a skip.
    """
    if not (current.start < shifted.start < current.end < shifted.end):
        return TdAction.SHIFT, 0, None
    overlap = Window(shifted.start, current.end)
    tail = Window(current.end, shifted.end)
    if overlap.size <= params.k or tail.size <= params.k:
        return TdAction.SHIFT, 0, None
    v = check_noise(pair, overlap, tail, params.tau, params.k, evaluator)
    if not v.is_noise:
        return TdAction.SHIFT, 0, v
    streak += 1
    if streak >= params.p:
        return TdAction.SKIP, streak, v
    return TdAction.SHIFT, streak, v


def run_td(pair: TimeSeriesPair, params: SearchParams, schedule: Optional[LayerSchedule] = None,
           noise_pruning: bool = True, incremental: bool = True,
           evaluator: Optional[Evaluator] = None) -> SearchResult:
    n = len(pair)
    params.validate(n)
    if schedule is None:
        schedule = LayerSchedule.halving(params.resolved_s_max(n), params.s_min)
    elif not isinstance(schedule, LayerSchedule):
        schedule = LayerSchedule(tuple(schedule))
    schedule.check(params, n)

    stats = SearchStats() if evaluator is None else evaluator.stats
    ev = evaluator if evaluator is not None else Evaluator(pair, params.k, incremental, stats)
    t0 = time.perf_counter()
    rs = ResultSet()
    partitions = [Window(0, n)]
    layers = []
    sigma = params.sigma

    for size in schedule.sizes:
        delta = params.td_step(size)
        visited: list[Window] = []
        nxt: list[Window] = []
        for part in partitions:
            if part.size < size:
                nxt.append(part)
                continue
            pending = part.start
            prev: Optional[Window] = None
            streak = 0
            w = Window(part.start, part.start + size)
            while w.end <= part.end:
                action = TdAction.SHIFT
                if noise_pruning and prev is not None:
                    action, streak, v = td_noise_step(prev, w, pair, params, streak, ev)
                    if v is not None and v.is_noise and action is TdAction.SKIP:
                        stats.prune_events += 1
                est = ev.evaluate(w)
                stats.windows_visited += 1
                visited.append(w)
                if est.normalized >= sigma:
                    rs.insert(CorrelatedWindow(w, est.mi_nats, est.normalized, "TD"))
                    if w.start > pending:
                        nxt.append(Window(pending, w.start))
                    pending = w.end
                    prev, streak = None, 0
                    if w.end + size > part.end:
                        break
                    w = Window(w.end, w.end + size)
                    continue
                if action is TdAction.SKIP:
                    prev, streak = None, 0
                    if w.end + size > part.end:
                        break
                    w = Window(w.end, w.end + size)
                    continue
                prev = w
                if w.end + delta > part.end:
                    break
                w = w.shift(delta)
            if part.end > pending:
                nxt.append(Window(pending, part.end))
        layers.append({"size": size, "delta": delta, "partitions": list(partitions),
                       "visited": visited})
        partitions = [p for p in nxt if p.size >= params.s_min]

    stats.runtime_s += time.perf_counter() - t0
    return SearchResult(rs, stats, "TD", {"layers": layers, "final_partitions": partitions})
