"""Box-assisted k-NN bookkeeping that keeps a KSG estimate current under edits.

Every live point carries its k-th neighbor distance ``d`` (the half-width of
its influenced region) and its marginal strips ``[x - d_x, x + d_x]`` and
``[y - d_y, y + d_y]``. Inserting or deleting a point ``o``:

* re-searches only the points whose influenced region contains ``o``;
* bumps ``n_x`` / ``n_y`` by one for points whose strip contains ``o``;
* leaves every other record alone.

Point ids are plain integers. A state built for a window of a series uses
the series indices as ids, so sliding the window is a matter of removing and
inserting index ranges.
"""

from __future__ import annotations

import bisect
import math
from typing import Iterable, Optional

import numpy as np

from .core import (
    InsufficientSamplesError,
    StateDesyncError,
    TimeSeriesPair,
    Window,
)
from .ksg import MiEstimate, assemble, closed_count, neighbor_stats, strip_counts


class BoxGrid:
    """Sparse square grid mapping integer cell coordinates to point ids."""

    def __init__(self, cell_size: float):
        if not cell_size > 0 or not math.isfinite(cell_size):
            cell_size = 1.0
        self.cell_size = cell_size
        self.cells: dict[tuple[int, int], list[int]] = {}

    def key(self, x: float, y: float) -> tuple[int, int]:
        cs = self.cell_size
        return (math.floor(x / cs), math.floor(y / cs))

    def add(self, pid: int, x: float, y: float) -> None:
        self.cells.setdefault(self.key(x, y), []).append(pid)

    def discard(self, pid: int, x: float, y: float) -> None:
        key = self.key(x, y)
        bucket = self.cells[key]
        bucket.remove(pid)
        if not bucket:
            del self.cells[key]

    def ring(self, cx: int, cy: int, r: int) -> list[int]:
        """Ids in the cells at Chebyshev cell distance exactly ``r``."""
        cells = self.cells
        if r == 0:
            return list(cells.get((cx, cy), ()))
        out: list[int] = []
        for i in range(cx - r, cx + r + 1):
            for j in (cy - r, cy + r):
                b = cells.get((i, j))
                if b:
                    out.extend(b)
        for j in range(cy - r + 1, cy + r):
            for i in (cx - r, cx + r):
                b = cells.get((i, j))
                if b:
                    out.extend(b)
        return out


def default_cell_size(x: np.ndarray, y: np.ndarray, k: int) -> float:
    n = max(len(x), 1)
    span = max(float(np.ptp(x)), float(np.ptp(y))) if len(x) else 1.0
    return span * math.sqrt(k / n)


class MiState:
    """Live point set plus per-point KSG records, mutable in place.

    ``searches`` counts every k-NN search performed, bulk loads included.
    """

    def __init__(self, k: int, capacity: int = 16, audit: bool = False):
        self.k = k
        self.audit_enabled = audit
        self.X = np.zeros(capacity)
        self.Y = np.zeros(capacity)
        self.live = np.zeros(capacity, dtype=bool)
        self.d = np.zeros(capacity)
        self.dx = np.zeros(capacity)
        self.dy = np.zeros(capacity)
        self.nx = np.zeros(capacity, dtype=np.int64)
        self.ny = np.zeros(capacity, dtype=np.int64)
        self.size = 0          # ids allocated so far
        self.n = 0             # live count
        self.lo = 0            # all live ids lie in [lo, hi)
        self.hi = 0
        self._xs: list[float] = []
        self._ys: list[float] = []
        self._grid = BoxGrid(1.0)
        self.grid_n = 0
        # after a bulk load the grid and sorted marginals are rebuilt on first use
        self._index_stale = False
        self.searches = 0
        self.window: Optional[Window] = None

    # ------------------------------------------------------------------ setup

    @classmethod
    def for_series(cls, pair: TimeSeriesPair, window: Window, k: int,
                   audit: bool = False) -> "MiState":
        """State over ``window`` whose ids are the series indices."""
        st = cls(k, capacity=len(pair), audit=audit)
        st.X[:] = pair.x
        st.Y[:] = pair.y
        st.size = len(pair)
        st._bulk_load(np.arange(window.start, window.end))
        st.window = window
        return st

    def _reserve(self, extra: int) -> None:
        need = self.size + extra
        if need <= len(self.X):
            return
        cap = max(need, 2 * len(self.X))
        for name in ("X", "Y", "d", "dx", "dy"):
            arr = getattr(self, name)
            grown = np.zeros(cap)
            grown[: len(arr)] = arr
            setattr(self, name, grown)
        for name, dt in (("live", bool), ("nx", np.int64), ("ny", np.int64)):
            arr = getattr(self, name)
            grown = np.zeros(cap, dtype=dt)
            grown[: len(arr)] = arr
            setattr(self, name, grown)

    def _bulk_load(self, ids: np.ndarray) -> None:
        """Fill records for ``ids`` in one vectorized pass; replaces all live points."""
        k = self.k
        if len(ids) <= k:
            raise InsufficientSamplesError(f"need more than k={k} points, got {len(ids)}")
        self.live[:] = False
        x = self.X[ids]
        y = self.Y[ids]
        ns = neighbor_stats(x, y, k)
        self.d[ids] = ns.d
        self.dx[ids] = ns.dx
        self.dy[ids] = ns.dy
        self.nx[ids] = ns.nx
        self.ny[ids] = ns.ny
        self.live[ids] = True
        self.n = len(ids)
        self.lo = int(ids.min())
        self.hi = int(ids.max()) + 1
        self.searches += len(ids)
        self._index_stale = True

    def _rebuild_index(self) -> None:
        ids = self.live_ids()
        self._index_stale = False
        self._xs = sorted(self.X[ids].tolist())
        self._ys = sorted(self.Y[ids].tolist())
        self._rebuild_grid()

    def _rebuild_grid(self) -> None:
        ids = self.live_ids()
        self._grid = BoxGrid(default_cell_size(self.X[ids], self.Y[ids], self.k))
        for i in ids.tolist():
            self._grid.add(i, self.X[i], self.Y[i])
        self.grid_n = self.n

    @property
    def grid(self) -> BoxGrid:
        if self._index_stale:
            self._rebuild_index()
        return self._grid

    @grid.setter
    def grid(self, g: BoxGrid) -> None:
        if self._index_stale:
            self._rebuild_index()
        self._grid = g

    @property
    def xs(self) -> list[float]:
        if self._index_stale:
            self._rebuild_index()
        return self._xs

    @property
    def ys(self) -> list[float]:
        if self._index_stale:
            self._rebuild_index()
        return self._ys

    # ---------------------------------------------------------------- queries

    def live_ids(self) -> np.ndarray:
        return np.flatnonzero(self.live[self.lo:self.hi]) + self.lo

    def finalize(self) -> MiEstimate:
        ids = self.live_ids()
        return assemble(self.nx[ids], self.ny[ids], self.d[ids],
                        float(np.std(self.X[ids])), float(np.std(self.Y[ids])), self.k)

    @property
    def sum_psi(self) -> float:
        from .ksg import PSI
        ids = self.live_ids()
        table = PSI.upto(self.n + 2)
        return math.fsum(table[self.nx[ids] + 1]) + math.fsum(table[self.ny[ids] + 1])

    def record(self, pid: int) -> dict:
        return {
            "id": pid,
            "coords": (float(self.X[pid]), float(self.Y[pid])),
            "knn_dist": float(self.d[pid]),
            "d_x": float(self.dx[pid]),
            "d_y": float(self.dy[pid]),
            "n_x": int(self.nx[pid]),
            "n_y": int(self.ny[pid]),
            "ir": (self.X[pid] - self.d[pid], self.X[pid] + self.d[pid],
                   self.Y[pid] - self.d[pid], self.Y[pid] + self.d[pid]),
            "imr_x": (self.X[pid] - self.dx[pid], self.X[pid] + self.dx[pid]),
            "imr_y": (self.Y[pid] - self.dy[pid], self.Y[pid] + self.dy[pid]),
        }

    # ------------------------------------------------------------ k-NN search

    def _search(self, i: int) -> None:
        """Fresh k-NN search for live point ``i`` and recount of its strips."""
        self.searches += 1
        k = self.k
        xi = self.X[i]
        yi = self.Y[i]
        grid = self.grid
        cs = grid.cell_size
        cx, cy = grid.key(xi, yi)
        cand: list[int] = []
        r = 0
        max_r = int(math.isqrt(4 * len(grid.cells))) + 2
        found = None
        while True:
            cand.extend(grid.ring(cx, cy, r))
            if len(cand) > k:
                ids = np.fromiter(cand, dtype=np.int64, count=len(cand))
                dist = np.maximum(np.abs(self.X[ids] - xi), np.abs(self.Y[ids] - yi))
                dist[ids == i] = np.inf
                dk = np.partition(dist, k - 1)[k - 1]
                # after ring r every point closer than r cells is already collected
                if dk < (r - 1e-9) * cs:
                    found = (ids, dist, dk)
                    break
            r += 1
            if r > max_r:
                break
        if found is None:
            ids = self.live_ids()
            dist = np.maximum(np.abs(self.X[ids] - xi), np.abs(self.Y[ids] - yi))
            dist[ids == i] = np.inf
            dk = np.partition(dist, k - 1)[k - 1]
            found = (ids, dist, dk)
        ids, dist, dk = found
        inside = ids[dist <= dk]
        dxi = float(np.abs(self.X[inside] - xi).max())
        dyi = float(np.abs(self.Y[inside] - yi).max())
        self.d[i] = dk
        self.dx[i] = dxi
        self.dy[i] = dyi
        self.nx[i] = closed_count(self.xs, float(xi), dxi)
        self.ny[i] = closed_count(self.ys, float(yi), dyi)

    # -------------------------------------------------------------- mutation

    def _influenced(self, o: int):
        """Masks over ``[lo, hi)``: IR hits, and strip-only hits per axis."""
        sl = slice(self.lo, self.hi)
        xo = self.X[o]
        yo = self.Y[o]
        X = self.X[sl]
        Y = self.Y[sl]
        live = self.live[sl].copy()
        if self.lo <= o < self.hi:
            live[o - self.lo] = False
        dist = np.maximum(np.abs(X - xo), np.abs(Y - yo))
        ir = live & (dist <= self.d[sl])
        rest = live & ~ir
        dx = self.dx[sl]
        dy = self.dy[sl]
        in_x = rest & (np.abs(X - xo) <= dx)
        in_y = rest & (np.abs(Y - yo) <= dy)
        return ir, in_x, in_y

    def activate(self, pid: int) -> None:
        """Insert a dormant id (its coordinates are already stored)."""
        if self._index_stale:
            self._rebuild_index()
        if self.live[pid]:
            raise KeyError(f"point {pid} is already live")
        x = float(self.X[pid])
        y = float(self.Y[pid])
        self.live[pid] = True
        self.n += 1
        if self.n == 1:
            self.lo, self.hi = pid, pid + 1
        else:
            self.lo = min(self.lo, pid)
            self.hi = max(self.hi, pid + 1)
        bisect.insort(self.xs, x)
        bisect.insort(self.ys, y)
        self.grid.add(pid, x, y)
        if self.n <= self.k:
            return
        if self.n == self.k + 1:
            # first moment every point has k neighbors
            self._research_all()
            return
        ir, in_x, in_y = self._influenced(pid)
        self.nx[self.lo:self.hi][in_x] += 1
        self.ny[self.lo:self.hi][in_y] += 1
        for j in (np.flatnonzero(ir) + self.lo).tolist():
            self._search(j)
        self._search(pid)
        self._maybe_regrid()
        if self.audit_enabled:
            self.audit()

    def deactivate(self, pid: int) -> None:
        if pid < 0 or pid >= self.size or not self.live[pid]:
            raise KeyError(f"point {pid} is not live")
        if self._index_stale:
            self._rebuild_index()
        if self.n - 1 <= self.k:
            raise InsufficientSamplesError(
                f"removing {pid} would leave {self.n - 1} points, need more than k={self.k}")
        x = float(self.X[pid])
        y = float(self.Y[pid])
        self.live[pid] = False
        self.n -= 1
        _remove_sorted(self.xs, x)
        _remove_sorted(self.ys, y)
        self.grid.discard(pid, x, y)
        ir, in_x, in_y = self._influenced(pid)
        self.nx[self.lo:self.hi][in_x] -= 1
        self.ny[self.lo:self.hi][in_y] -= 1
        for j in (np.flatnonzero(ir) + self.lo).tolist():
            self._search(j)
        while not self.live[self.lo]:
            self.lo += 1
        while not self.live[self.hi - 1]:
            self.hi -= 1
        self._maybe_regrid()
        if self.audit_enabled:
            self.audit()

    def add_point(self, x: float, y: float) -> int:
        """Append a brand-new point and insert it; returns its id."""
        self._reserve(1)
        pid = self.size
        self.size += 1
        self.X[pid] = x
        self.Y[pid] = y
        self.activate(pid)
        return pid

    def apply_batch(self, inserted: np.ndarray, removed: np.ndarray, block: int = 256) -> None:
        """Insert and remove many ids at once.

        The influenced-region rules hold for a whole batch: a surviving point
        whose closed k-NN square holds no changed point keeps its neighbor set,
        and its strip counts move by the changed points inside its strips.
        Only the remaining survivors and the inserted points are re-searched,
        each once, by a vectorized scan over the new live set.
        """
        inserted = np.asarray(inserted, dtype=np.int64)
        removed = np.asarray(removed, dtype=np.int64)
        if len(inserted) and self.live[inserted].any():
            raise KeyError(f"point {int(inserted[self.live[inserted]][0])} is already live")
        if len(removed) and not self.live[removed].all():
            raise KeyError(f"point {int(removed[~self.live[removed]][0])} is not live")
        if self.n + len(inserted) - len(removed) <= self.k:
            raise InsufficientSamplesError(f"batch would leave too few points for k={self.k}")

        old = self.live_ids()
        keep = old[~np.isin(old, removed)]
        changed = np.concatenate([inserted, removed])
        sign = np.concatenate([np.ones(len(inserted), np.int64), -np.ones(len(removed), np.int64)])
        cx = self.X[changed]
        cy = self.Y[changed]
        hit = np.zeros(len(keep), dtype=bool)
        for s in range(0, len(keep), block):
            ids = keep[s:s + block]
            ax = np.abs(cx[None, :] - self.X[ids][:, None])
            ay = np.abs(cy[None, :] - self.Y[ids][:, None])
            ir = (np.maximum(ax, ay) <= self.d[ids][:, None]).any(axis=1)
            hit[s:s + block] = ir
            self.nx[ids] += np.where(ir, 0, ((ax <= self.dx[ids][:, None]) * sign).sum(axis=1))
            self.ny[ids] += np.where(ir, 0, ((ay <= self.dy[ids][:, None]) * sign).sum(axis=1))

        a = min(self.lo, int(inserted.min())) if len(inserted) else self.lo
        b = max(self.hi, int(inserted.max()) + 1) if len(inserted) else self.hi
        self.live[removed] = False
        self.live[inserted] = True
        self.n += len(inserted) - len(removed)
        live = np.flatnonzero(self.live[a:b]) + a
        self.lo = int(live[0])
        self.hi = int(live[-1]) + 1
        self._index_stale = True

        lx = self.X[live]
        ly = self.Y[live]
        sx = np.sort(lx)
        sy = np.sort(ly)
        redo = np.concatenate([keep[hit], inserted])
        k = self.k
        for s in range(0, len(redo), block):
            ids = redo[s:s + block]
            ax = np.abs(lx[None, :] - self.X[ids][:, None])
            ay = np.abs(ly[None, :] - self.Y[ids][:, None])
            dist = np.maximum(ax, ay)
            dist[live[None, :] == ids[:, None]] = np.inf
            dk = np.partition(dist, k - 1, axis=1)[:, k - 1]
            inside = dist <= dk[:, None]
            dx = np.where(inside, ax, 0.0).max(axis=1)
            dy = np.where(inside, ay, 0.0).max(axis=1)
            self.d[ids] = dk
            self.dx[ids] = dx
            self.dy[ids] = dy
            self.nx[ids] = strip_counts(sx, self.X[ids], dx) - 1
            self.ny[ids] = strip_counts(sy, self.Y[ids], dy) - 1
        self.searches += len(redo)
        if self.audit_enabled:
            self.audit()

    def _research_all(self) -> None:
        for j in self.live_ids().tolist():
            self._search(j)

    def _maybe_regrid(self) -> None:
        if self.n > 2 * self.grid_n or 2 * self.n < self.grid_n:
            self._rebuild_grid()

    # ----------------------------------------------------------------- audit

    def audit(self) -> None:
        """Recompute every live record from scratch and compare (debug aid)."""
        ids = self.live_ids()
        ns = neighbor_stats(self.X[ids], self.Y[ids], self.k)
        for name in ("d", "dx", "dy", "nx", "ny"):
            mine = getattr(self, name)[ids]
            ref = getattr(ns, name)
            bad = np.flatnonzero(mine != ref)
            if len(bad):
                pid = int(ids[bad[0]])
                raise StateDesyncError(
                    f"record {pid} field {name}: stored {mine[bad[0]]} != fresh {ref[bad[0]]}")


def _remove_sorted(seq: list[float], v: float) -> None:
    i = bisect.bisect_left(seq, v)
    if i == len(seq) or seq[i] != v:
        raise StateDesyncError(f"value {v} missing from marginal index")
    del seq[i]


# --------------------------------------------------------------------------
# Functional surface


def build(pair_slice, k: int = 4, audit: bool = False) -> MiState:
    """State holding every sample of ``pair_slice`` (ids 0..n-1)."""
    if not isinstance(pair_slice, TimeSeriesPair):
        x, y = pair_slice
        pair_slice = TimeSeriesPair(np.asarray(x, float), np.asarray(y, float))
    n = len(pair_slice)
    if n <= k:
        raise InsufficientSamplesError(f"need more than k={k} samples, got {n}")
    return MiState.for_series(pair_slice, Window(0, n), k, audit=audit)


def insert_point(state: MiState, p) -> MiState:
    """Insert a point given as ``(x, y)``; the new id is ``state.size - 1``."""
    x, y = p
    state.add_point(float(x), float(y))
    state.window = None
    return state


def remove_point(state: MiState, pid: int) -> MiState:
    state.deactivate(int(pid))
    state.window = None
    return state


def finalize(state: MiState) -> MiEstimate:
    return state.finalize()


def slide(state: MiState, pair: TimeSeriesPair, src: Window, dst: Window,
          allow_rebuild: bool = False) -> MiState:
    """Move a series-backed state from window ``src`` to window ``dst``.

    Points in ``dst`` but not ``src`` are inserted and points in ``src`` but
    not ``dst`` removed as one batch. With ``allow_rebuild`` the state is
    reloaded from scratch whenever the edit would cost more k-NN searches
    than a rebuild.
    """
    if state.window != src:
        raise StateDesyncError(f"state is on {state.window}, not {src}")
    if dst.end > len(pair) or dst.end > state.size:
        raise StateDesyncError(f"window {dst} outside the backing series")
    if dst == src:
        return state
    added, removed = _diff(src, dst)
    if allow_rebuild:
        changes = sum(len(r) for r in added) + sum(len(r) for r in removed)
        if not src.overlaps(dst) or changes * (state.k + 1) >= dst.size:
            state._bulk_load(np.arange(dst.start, dst.end))
            state.window = dst
            return state
    ins = np.concatenate([np.arange(r.start, r.stop) for r in added] or [np.zeros(0, np.int64)])
    rem = np.concatenate([np.arange(r.start, r.stop) for r in removed] or [np.zeros(0, np.int64)])
    state.apply_batch(ins, rem)
    state.window = dst
    return state


def _diff(a: Window, b: Window) -> tuple[list[range], list[range]]:
    """Index ranges in ``b`` but not ``a``, and in ``a`` but not ``b``."""

    def minus(p: Window, q: Window) -> list[range]:
        out = []
        if p.start < q.start:
            out.append(range(p.start, min(p.end, q.start)))
        if p.end > q.end:
            out.append(range(max(p.start, q.end), p.end))
        return [r for r in out if len(r)]

    return minus(b, a), minus(a, b)


def edit_cost(a: Optional[Window], b: Window) -> int:
    """Number of point insertions plus removals to move from ``a`` to ``b``."""
    if a is None or not a.overlaps(b):
        return a.size + b.size if a is not None else b.size
    added, removed = _diff(a, b)
    return sum(len(r) for r in added) + sum(len(r) for r in removed)


def replay(state: MiState, ops: Iterable[tuple[str, int]]) -> MiState:
    """Apply ``("insert", id)`` / ``("remove", id)`` operations in order."""
    for op, pid in ops:
        if op == "insert":
            state.activate(pid)
        elif op == "remove":
            state.deactivate(pid)
        else:
            raise ValueError(op)
    state.window = None
    return state
