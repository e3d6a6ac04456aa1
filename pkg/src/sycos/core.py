"""Shared vocabulary: series pairs, windows, result sets and search parameters."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field, asdict, replace
from typing import Iterator, Optional, Sequence

import numpy as np


class SycosError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SycosError, ValueError):
    """Inconsistent parameters, schedules or plans."""


class BoundsError(SycosError, IndexError):
    pass


class OverlapError(SycosError, ValueError):
    """A window would overlap a member already in a ResultSet."""

    def __init__(self, window: "Window", conflict: "Window"):
        super().__init__(f"{window} overlaps existing member {conflict}")
        self.window = window
        self.conflict = conflict


class InsufficientSamplesError(SycosError, ValueError):
    pass


class DomainError(SycosError, ValueError):
    pass


class DegenerateDataError(SycosError, ValueError):
    pass


class StateDesyncError(SycosError, RuntimeError):
    pass


class ContractError(SycosError, ValueError):
    pass


class IngestError(SycosError, ValueError):
    pass


@dataclass(frozen=True, order=True)
class Window:
    """Half-open index interval ``[start, end)``."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise BoundsError(f"invalid window [{self.start}, {self.end})")

    @property
    def size(self) -> int:
        return self.end - self.start

    def __len__(self) -> int:
        return self.end - self.start

    def overlaps(self, other: "Window") -> bool:
        return self.start < other.end and other.start < self.end

    def shift(self, delta: int) -> "Window":
        return Window(self.start + delta, self.end + delta)

    def contains(self, other: "Window") -> bool:
        return self.start <= other.start and other.end <= self.end

    def __str__(self) -> str:
        return f"[{self.start}, {self.end})"


@dataclass(frozen=True)
class TimeSeriesPair:
    x: np.ndarray
    y: np.ndarray
    start_time: float = 0
    step: float = 1
    timestamps: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=float)
        y = np.ascontiguousarray(self.y, dtype=float)
        if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
            raise ConfigError("x and y must be one-dimensional and equally long")
        if len(x) < 2:
            raise ConfigError("a series pair needs at least two samples")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ConfigError("series values must be finite")
        if self.step <= 0:
            raise ConfigError("step must be positive")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps)
            if len(ts) != len(x):
                raise ConfigError("timestamps must match the series length")
            object.__setattr__(self, "timestamps", ts)

    def __len__(self) -> int:
        return len(self.x)

    @property
    def full(self) -> Window:
        return Window(0, len(self.x))

    def time_of(self, index: int):
        if self.timestamps is not None:
            return self.timestamps[index]
        return self.start_time + index * self.step


def slice_pair(pair: TimeSeriesPair, w: Window) -> TimeSeriesPair:
    """Sub-pair covering exactly the samples of ``w``."""
    if w.end > len(pair):
        raise BoundsError(f"window {w} exceeds series length {len(pair)}")
    ts = None if pair.timestamps is None else pair.timestamps[w.start:w.end]
    return TimeSeriesPair(
        pair.x[w.start:w.end],
        pair.y[w.start:w.end],
        start_time=pair.start_time + w.start * pair.step,
        step=pair.step,
        timestamps=ts,
    )


@dataclass(frozen=True)
class CorrelatedWindow:
    window: Window
    mi: float
    normalized_mi: float
    method: str

    @property
    def start(self) -> int:
        return self.window.start

    @property
    def end(self) -> int:
        return self.window.end


class ResultSet:
    """Pairwise-disjoint correlated windows kept sorted by start index."""

    def __init__(self, windows: Sequence[CorrelatedWindow] = ()):
        self._items: list[CorrelatedWindow] = []
        for cw in windows:
            self.insert(cw)

    def insert(self, cw: CorrelatedWindow) -> None:
        starts = [c.window.start for c in self._items]
        pos = bisect.bisect_left(starts, cw.window.start)
        for nb in self._items[max(0, pos - 1):pos + 1]:
            if nb.window.overlaps(cw.window):
                raise OverlapError(cw.window, nb.window)
        self._items.insert(pos, cw)

    def conflicts(self, w: Window) -> list[CorrelatedWindow]:
        return [c for c in self._items if c.window.overlaps(w)]

    @property
    def windows(self) -> list[CorrelatedWindow]:
        return list(self._items)

    def spans(self) -> list[Window]:
        return [c.window for c in self._items]

    def __iter__(self) -> Iterator[CorrelatedWindow]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResultSet):
            return NotImplemented
        return self._items == other._items

    def __repr__(self) -> str:
        inner = ", ".join(str(c.window) for c in self._items)
        return f"ResultSet({inner})"


def insert_disjoint(rs: ResultSet, cw: CorrelatedWindow) -> ResultSet:
    """Functional insert: returns a new set, ``rs`` is left untouched."""
    out = ResultSet(rs.windows)
    out.insert(cw)
    return out


@dataclass(frozen=True)
class SearchParams:
    """Thresholds and step sizes shared by every search strategy.

    ``delta_td`` and ``delta_bu`` default to ``None`` which means "derive from
    the window sizes": a quarter of the layer size for the top-down slide and a
    third of ``s_min`` for the bottom-up moves. ``s_max=None`` means the series
    length.
    """

    sigma: float = 0.2
    tau_ratio: float = 0.25
    delta_td: Optional[int] = None
    delta_bu: Optional[int] = None
    s_min: int = 30
    s_max: Optional[int] = None
    k: int = 4
    t_max_idle: int = 2
    h: int = 5
    p: int = 3
    alpha: float = 0.5
    rho: float = 0.5
    m: int = 6
    M: int = 20
    seed: int = 0

    @property
    def tau(self) -> float:
        return self.tau_ratio * self.sigma

    def resolved_s_max(self, n: int) -> int:
        return n if self.s_max is None else self.s_max

    def bu_step(self) -> int:
        return self.delta_bu if self.delta_bu is not None else max(1, self.s_min // 3)

    def td_step(self, size: int) -> int:
        return self.delta_td if self.delta_td is not None else max(1, size // 4)

    def validate(self, n: Optional[int] = None) -> "SearchParams":
        if not (0 < self.sigma <= 1):
            raise ConfigError("sigma must lie in (0, 1]")
        if not (0 <= self.tau_ratio < 1):
            raise ConfigError("tau_ratio must lie in [0, 1)")
        if self.s_min < 2:
            raise ConfigError("s_min must be at least 2")
        if self.k < 1 or self.k >= self.s_min:
            raise ConfigError("k must satisfy 1 <= k < s_min")
        if self.s_max is not None and self.s_max < self.s_min:
            raise ConfigError("s_max must be >= s_min")
        if n is not None and self.resolved_s_max(n) > n:
            raise ConfigError(f"s_max={self.s_max} exceeds series length {n}")
        if n is not None and self.s_min > n:
            raise ConfigError(f"s_min={self.s_min} exceeds series length {n}")
        for name in ("delta_td", "delta_bu"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.t_max_idle < 0 or self.h < 1 or self.p < 1:
            raise ConfigError("t_max_idle >= 0, h >= 1 and p >= 1 are required")
        if not (0 <= self.alpha <= 1):
            raise ConfigError("alpha must lie in [0, 1]")
        if not (0 < self.rho <= 1):
            raise ConfigError("rho must lie in (0, 1]")
        if not (1 <= self.m <= self.M):
            raise ConfigError("1 <= m <= M is required")
        return self

    def with_(self, **changes) -> "SearchParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SearchStats:
    """Work counters collected during one search run."""

    mi_evaluations: int = 0
    knn_searches: int = 0
    windows_visited: int = 0
    noise_checks: int = 0
    prune_events: int = 0
    rebuilds: int = 0
    slides: int = 0
    climbs: int = 0
    runtime_s: float = 0.0
    extra: dict = field(default_factory=dict)

    def merge(self, other: "SearchStats") -> "SearchStats":
        out = SearchStats()
        for name in ("mi_evaluations", "knn_searches", "windows_visited", "noise_checks",
                     "prune_events", "rebuilds", "slides", "climbs"):
            setattr(out, name, getattr(self, name) + getattr(other, name))
        out.runtime_s = self.runtime_s + other.runtime_s
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        if not d["extra"]:
            d.pop("extra")
        return d


def jitter(pair: TimeSeriesPair, seed: int = 0, scale: float = 1e-10) -> TimeSeriesPair:
    """De-tie both series with uniform noise of ``scale * value-range``.

    Deterministic for a given seed, so repeated ingestion gives identical pairs.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0x7177,)))
    out = []
    for v in (pair.x, pair.y):
        span = float(v.max() - v.min())
        if span == 0.0:
            span = max(abs(float(v[0])), 1.0)
        out.append(v + rng.uniform(-0.5, 0.5, size=len(v)) * span * scale)
    return TimeSeriesPair(out[0], out[1], start_time=pair.start_time, step=pair.step,
                          timestamps=pair.timestamps)


def jaccard(a: Sequence[Window], b: Sequence[Window]) -> float:
    """Jaccard index of the sample sets covered by two window collections."""
    sa = _cover(a)
    sb = _cover(b)
    union = len(sa | sb)
    return 1.0 if union == 0 else len(sa & sb) / union


def coverage(found: Sequence[Window], target: Window) -> float:
    """Fraction of ``target`` samples covered by ``found``."""
    cov = _cover(found) & set(range(target.start, target.end))
    return len(cov) / target.size


def _cover(ws: Sequence[Window]) -> set:
    s: set = set()
    for w in ws:
        s.update(range(w.start, w.end))
    return s
