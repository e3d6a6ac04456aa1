"""Paired runs of the four search variants on one pair."""

from __future__ import annotations

import time

from .bottomup import run_bu
from .core import SearchParams, TimeSeriesPair, Window, jaccard
from .topdown import run_td

# name -> (noise_pruning, incremental)
VARIANTS = {
    "origin": (False, False),
    "noise": (True, False),
    "mi_opt": (False, True),
    "both": (True, True),
}


def run_variants(pair: TimeSeriesPair, params: SearchParams, methods=("TD", "BU")) -> dict:
    """Stats and windows for every (method, variant) combination."""
    out: dict = {}
    for method in methods:
        runner = run_td if method == "TD" else run_bu
        rows = {}
        for name, (noise, inc) in VARIANTS.items():
            t0 = time.perf_counter()
            res = runner(pair, params, noise_pruning=noise, incremental=inc)
            wall = time.perf_counter() - t0
            rows[name] = {
                "windows": [[w.start, w.end] for w in res.results.spans()],
                "mi_evaluations": res.stats.mi_evaluations,
                "knn_searches": res.stats.knn_searches,
                "prune_events": res.stats.prune_events,
                "noise_checks": res.stats.noise_checks,
                "runtime_s": wall,
            }
        origin = rows["origin"]
        for name, row in rows.items():
            row["overlap_vs_origin"] = _overlap(origin["windows"], row["windows"])
            row["knn_ratio_vs_origin"] = (origin["knn_searches"] / row["knn_searches"]
                                          if row["knn_searches"] else float("inf"))
        out[method] = rows
    return out


def _overlap(a, b) -> float:
    return jaccard([Window(*w) for w in a], [Window(*w) for w in b])
