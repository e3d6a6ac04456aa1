"""CSV ingestion and window reports (JSON and CSV)."""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from .core import IngestError, ResultSet, SearchParams, SearchStats, TimeSeriesPair, jitter


@dataclass(frozen=True)
class IngestSpec:
    """Where to read the two series from.

    With ``y_path=None`` both series come from ``x_path`` via ``x_column`` and
    ``y_column``. With two files each one provides ``value_column``, aligned on
    ``timestamp_column`` when given and by row otherwise. ``aggregate`` is a
    pandas frequency such as ``"1min"`` (needs timestamps) or a bucket length
    in rows.
    """

    x_path: Union[str, Path]
    y_path: Optional[Union[str, Path]] = None
    x_column: str = "x"
    y_column: str = "y"
    value_column: str = "value"
    timestamp_column: Optional[str] = None
    aggregate: Optional[Union[str, int]] = None
    jitter: bool = True
    seed: int = 0


def _read(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path)
    except FileNotFoundError as exc:
        raise IngestError(f"no such file: {path}") from exc
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot parse {path}: {exc}") from exc


def _column(df: pd.DataFrame, name: str, path) -> pd.Series:
    if name not in df.columns:
        raise IngestError(f"{path} has no column {name!r} (columns: {list(df.columns)})")
    return pd.to_numeric(df[name], errors="coerce")


def ingest(spec: IngestSpec) -> TimeSeriesPair:
    ts_col = spec.timestamp_column
    if spec.y_path is None:
        df = _read(spec.x_path)
        frame = pd.DataFrame({"x": _column(df, spec.x_column, spec.x_path),
                              "y": _column(df, spec.y_column, spec.x_path)})
        if ts_col:
            if ts_col not in df.columns:
                raise IngestError(f"{spec.x_path} has no column {ts_col!r}")
            frame.index = pd.to_datetime(df[ts_col])
    else:
        dx = _read(spec.x_path)
        dy = _read(spec.y_path)
        sx = _column(dx, spec.value_column, spec.x_path)
        sy = _column(dy, spec.value_column, spec.y_path)
        if ts_col:
            for d, p in ((dx, spec.x_path), (dy, spec.y_path)):
                if ts_col not in d.columns:
                    raise IngestError(f"{p} has no column {ts_col!r}")
            sx.index = pd.to_datetime(dx[ts_col])
            sy.index = pd.to_datetime(dy[ts_col])
            frame = pd.concat({"x": sx, "y": sy}, axis=1, join="inner").sort_index()
        else:
            if len(sx) != len(sy):
                raise IngestError(f"series lengths differ: {len(sx)} vs {len(sy)}")
            frame = pd.DataFrame({"x": sx.to_numpy(), "y": sy.to_numpy()})

    frame = frame.replace([np.inf, -np.inf], np.nan).dropna()
    if spec.aggregate is not None:
        frame = _aggregate(frame, spec.aggregate, bool(ts_col))
    if len(frame) < 2:
        raise IngestError(f"only {len(frame)} usable rows after cleaning")

    timestamps = None
    if ts_col:
        timestamps = np.array([t.isoformat() for t in frame.index])
    pair = TimeSeriesPair(frame["x"].to_numpy(float), frame["y"].to_numpy(float),
                          timestamps=timestamps)
    return jitter(pair, spec.seed) if spec.jitter else pair


def _aggregate(frame: pd.DataFrame, rule, has_time: bool) -> pd.DataFrame:
    if isinstance(rule, str) and not rule.isdigit():
        if not has_time:
            raise IngestError("time-based aggregation needs a timestamp column")
        return frame.resample(rule).mean().dropna()
    size = int(rule)
    if size < 1:
        raise IngestError("bucket length must be positive")
    groups = np.arange(len(frame)) // size
    out = frame.groupby(groups).mean()
    if has_time:
        out.index = frame.index[::size][: len(out)]
    return out


# ---------------------------------------------------------------- reports

WINDOW_FIELDS = ("start_index", "end_index", "start_time", "end_time", "mi", "normalized_mi",
                 "method")


@dataclass
class WindowReport:
    """Serializable view of a result set. ``end_index`` is inclusive."""

    windows: list[dict]
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_results(cls, results: ResultSet, pair: Optional[TimeSeriesPair] = None,
                     params: Optional[SearchParams] = None,
                     stats: Optional[SearchStats] = None, **extra) -> "WindowReport":
        rows = []
        has_time = pair is not None and pair.timestamps is not None
        for c in results:
            row = {"start_index": c.start, "end_index": c.end - 1,
                   "mi": float(c.mi), "normalized_mi": float(c.normalized_mi),
                   "method": c.method}
            if has_time:
                row["start_time"] = str(pair.time_of(c.start))
                row["end_time"] = str(pair.time_of(c.end - 1))
            rows.append(row)
        meta = dict(extra)
        if params is not None:
            meta["params"] = params.to_dict()
            meta["seed"] = params.seed
        if stats is not None:
            meta["stats"] = stats.to_dict()
        return cls(rows, meta)

    def to_json(self) -> str:
        return json.dumps({"windows": self.windows, "metadata": self.metadata},
                          sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "WindowReport":
        data = json.loads(text)
        return cls(list(data.get("windows", [])), dict(data.get("metadata", {})))

    def to_csv(self) -> str:
        buf = _io.StringIO()
        cols = [f for f in WINDOW_FIELDS
                if f not in ("start_time", "end_time") or any(f in w for w in self.windows)]
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for w in self.windows:
            writer.writerow(w)
        return buf.getvalue()

    def spans(self) -> list[tuple[int, int]]:
        """Half-open ``(start, end)`` index pairs."""
        return [(w["start_index"], w["end_index"] + 1) for w in self.windows]


def write_pair_csv(pair: TimeSeriesPair, path: Union[str, Path]) -> None:
    df = pd.DataFrame({"x": pair.x, "y": pair.y})
    if pair.timestamps is not None:
        df.insert(0, "time", pair.timestamps)
    df.to_csv(path, index=False, float_format="%.17g")
