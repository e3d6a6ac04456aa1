"""Pick top-down or bottom-up search from trial runs on sampled partitions.

Both searches run on a few equal-length partitions. Each method's score
rewards a short normalized runtime and a large share of the windows that
method is good at: large windows for top-down and small ones for bottom-up.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bottomup import run_bu
from .core import ConfigError, SearchParams, TimeSeriesPair, Window, slice_pair
from .topdown import run_td


def sample_partitions(n_total: int, M: int, m: int, seed: int = 0, s_min: int = 2) -> list[Window]:
    """``m`` of the ``M`` equal partitions of length ``n_total // M``, sorted by start."""
    if not 1 <= m <= M:
        raise ConfigError(f"need 1 <= m <= M, got m={m}, M={M}")
    length = n_total // M
    if length < s_min:
        raise ConfigError(f"partitions of length {length} are shorter than s_min={s_min}")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0x5E1,)))
    chosen = np.sort(rng.choice(M, size=m, replace=False))
    return [Window(int(i) * length, (int(i) + 1) * length) for i in chosen]


def classify_windows(windows: Sequence, rho: float, s_max: int) -> tuple[int, int]:
    """(small, large) counts; a window is small when its size is at most rho * s_max."""
    if not 0 < rho <= 1:
        raise ConfigError("rho must lie in (0, 1]")
    cut = rho * s_max
    small = 0
    for w in windows:
        size = w.size if hasattr(w, "size") else w.window.size
        if size <= cut:
            small += 1
    return small, len(windows) - small


@dataclass
class TrialStats:
    avg_runtime_td: float = 0.0
    avg_runtime_bu: float = 0.0
    n_large_td: int = 0
    n_small_bu: int = 0
    n_small_td: int = 0
    n_large_bu: int = 0
    partitions: list = field(default_factory=list)


@dataclass
class SelectionReport:
    nscore_td: float
    nscore_bu: float
    chosen: str
    stats: TrialStats
    alpha: float
    rho: float
    t_norm_td: float = 0.5
    t_norm_bu: float = 0.5
    n_norm_td: float = 0.5
    n_norm_bu: float = 0.5
    degenerate_counts: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stats"]["partitions"] = [
            {**p, "window": [p["window"].start, p["window"].end]} if isinstance(p.get("window"), Window) else p
            for p in self.stats.partitions
        ]
        return d


def compute_scores(stats: TrialStats, alpha: float, rho: float = 0.5) -> SelectionReport:
    """Normalize runtimes and window counts, then blend them with weight ``alpha``."""
    t_td, t_bu = stats.avg_runtime_td, stats.avg_runtime_bu
    if not (t_td > 0 and t_bu > 0):
        raise ConfigError("both average runtimes must be positive")
    total_t = t_td + t_bu
    tn_td, tn_bu = t_td / total_t, t_bu / total_t
    total_n = stats.n_large_td + stats.n_small_bu
    degenerate = total_n == 0
    if degenerate:
        nn_td = nn_bu = 0.5
    else:
        nn_td = stats.n_large_td / total_n
        nn_bu = stats.n_small_bu / total_n
    score_td = alpha / tn_td + (1 - alpha) * nn_td
    score_bu = alpha / tn_bu + (1 - alpha) * nn_bu
    chosen = "TD" if score_td > score_bu else "BU"
    return SelectionReport(score_td, score_bu, chosen, stats, alpha, rho, tn_td, tn_bu,
                           nn_td, nn_bu, degenerate)


def select(pair: TimeSeriesPair, params: SearchParams, noise_pruning: bool = True,
           incremental: bool = True, clock: Callable[[], float] = time.perf_counter
           ) -> SelectionReport:
    """Run both searches on ``m`` sampled partitions and score them."""
    n = len(pair)
    params.validate(n)
    parts = sample_partitions(n, params.M, params.m, params.seed, params.s_min)
    stats = TrialStats()
    t_td = t_bu = 0.0
    for i, part in enumerate(parts):
        sub = slice_pair(pair, part)
        s_max = min(params.resolved_s_max(n), part.size)
        trial = params.with_(s_max=s_max)
        t0 = clock()
        td = run_td(sub, trial, noise_pruning=noise_pruning, incremental=incremental)
        t1 = clock()
        bu = run_bu(sub, trial, noise_pruning=noise_pruning, incremental=incremental, stream=i)
        t2 = clock()
        t_td += t1 - t0
        t_bu += t2 - t1
        td_small, td_large = classify_windows(td.results.spans(), params.rho, s_max)
        bu_small, bu_large = classify_windows(bu.results.spans(), params.rho, s_max)
        stats.n_small_td += td_small
        stats.n_large_td += td_large
        stats.n_small_bu += bu_small
        stats.n_large_bu += bu_large
        stats.partitions.append({
            "window": part, "s_max": s_max,
            "runtime_td": t1 - t0, "runtime_bu": t2 - t1,
            "td": [td_small, td_large], "bu": [bu_small, bu_large],
        })
    stats.avg_runtime_td = max(t_td / len(parts), 1e-9)
    stats.avg_runtime_bu = max(t_bu / len(parts), 1e-9)
    return compute_scores(stats, params.alpha, params.rho)
