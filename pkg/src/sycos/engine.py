"""Window scoring shared by the top-down and bottom-up searches.

An :class:`Evaluator` answers "what is the MI of window w" either from scratch
or by moving one incremental state from its current window to ``w``. Results
are memoized per window, so revisiting a window never costs a second estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .core import SearchStats, TimeSeriesPair, Window, CorrelatedWindow, ResultSet
from .incremental import MiState, edit_cost, slide
from .ksg import MiEstimate, estimate_mi


class Evaluator:
    def __init__(self, pair: TimeSeriesPair, k: int, incremental: bool,
                 stats: Optional[SearchStats] = None):
        self.pair = pair
        self.k = k
        self.incremental = incremental
        self.stats = stats if stats is not None else SearchStats()
        self.cache: dict[Window, MiEstimate] = {}
        self.state: Optional[MiState] = None

    def evaluate(self, w: Window, scratch: bool = False) -> MiEstimate:
        """MI of ``w``. ``scratch=True`` leaves the incremental state where it is."""
        hit = self.cache.get(w)
        if hit is not None:
            return hit
        self.stats.mi_evaluations += 1
        if self.incremental and not scratch:
            est = self._move(w)
        else:
            est = estimate_mi((self.pair.x[w.start:w.end], self.pair.y[w.start:w.end]), self.k)
            self.stats.knn_searches += w.size
        self.cache[w] = est
        return est

    def evaluate_many(self, ws: Iterable[Window]) -> dict[Window, MiEstimate]:
        """Evaluate several windows, visiting them in a cheap order when incremental."""
        todo = [w for w in ws if w not in self.cache]
        if self.incremental:
            while todo:
                here = self.state.window if self.state is not None else None
                nxt = min(todo, key=lambda w: (edit_cost(here, w), w))
                todo.remove(nxt)
                self.evaluate(nxt)
        else:
            for w in todo:
                self.evaluate(w)
        return {w: self.cache[w] for w in ws}

    def _move(self, w: Window) -> MiEstimate:
        st = self.state
        # an edit costs roughly k+1 searches per changed point, a rebuild one per point
        if st is None or st.window is None or edit_cost(st.window, w) * (self.k + 1) >= w.size:
            if st is None:
                st = self.state = MiState.for_series(self.pair, w, self.k)
            else:
                st._bulk_load(np.arange(w.start, w.end))
                st.window = w
            self.stats.knn_searches += w.size
            self.stats.rebuilds += 1
        else:
            before = st.searches
            slide(st, self.pair, st.window, w)
            self.stats.knn_searches += st.searches - before
            self.stats.slides += 1
        return st.finalize()


@dataclass
class SearchResult:
    """Outcome of one search run."""

    results: ResultSet
    stats: SearchStats
    method: str
    trace: dict = field(default_factory=dict)

    @property
    def windows(self) -> list[CorrelatedWindow]:
        return self.results.windows
