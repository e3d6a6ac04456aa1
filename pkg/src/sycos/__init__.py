"""Correlated-window search between two synchronous time series.

Windows are scored with a k-NN mutual information estimate normalized to
``[0, 1]``; top-down and bottom-up searches collect every non-overlapping
window whose score reaches a threshold.
"""

from .bottomup import run_bu
from .core import (
    CorrelatedWindow,
    ResultSet,
    SearchParams,
    SearchStats,
    TimeSeriesPair,
    Window,
    slice_pair,
)
from .ksg import MiEstimate, estimate_entropy, estimate_mi, normalized_mi
from .parallel import run_parallel
from .selector import select
from .topdown import LayerSchedule, run_td

__all__ = [
    "CorrelatedWindow",
    "LayerSchedule",
    "MiEstimate",
    "ResultSet",
    "SearchParams",
    "SearchStats",
    "TimeSeriesPair",
    "Window",
    "estimate_entropy",
    "estimate_mi",
    "normalized_mi",
    "run_bu",
    "run_parallel",
    "run_td",
    "select",
    "slice_pair",
]

__version__ = "0.1.0"
