"""KSG mutual information, k-NN joint entropy and normalized MI over one window.

Normalized MI divides the MI by the joint entropy of the window measured after
each marginal is mapped to standard normal scores. That entropy equals
``log(2 pi e) - I`` exactly, so the ratio is free of units, invariant under
monotone maps of either series and always lands in ``[0, 1]``.

All distances use the maximum norm. For every point the neighbor set is every
other point within the k-th neighbor distance ``d`` (ties included), ``d_x`` and
``d_y`` are the largest per-axis offsets inside that set, and the marginal
counts use closed bounds ``x - d_x <= x_j <= x + d_x``. The incremental
structure in :mod:`sycos.incremental` applies the very same rules, and both
routes finish through :func:`assemble`, so they agree bit for bit.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .core import DegenerateDataError, DomainError, InsufficientSamplesError, TimeSeriesPair

EULER_GAMMA = 0.57721566490153286061
ENTROPY_FLOOR = 1e-6
LOG_2PIE = math.log(2.0 * math.pi * math.e)

# Bernoulli-number coefficients of the asymptotic digamma series, B_2n / (2n).
_ASYMPTOTIC = (
    1.0 / 12,
    -1.0 / 120,
    1.0 / 252,
    -1.0 / 240,
    1.0 / 132,
    -691.0 / 32760,
    1.0 / 12,
)


def digamma(x: float) -> float:
    """psi(x) for x > 0: upward recurrence to x >= 10, then the asymptotic series."""
    if not x > 0:
        raise DomainError(f"digamma is only defined here for x > 0, got {x}")
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for c in _ASYMPTOTIC:
        series += c * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


class _PsiTable:
    """psi(1..n) cached as an array, grown on demand."""

    def __init__(self):
        self.values = np.array([np.nan, -EULER_GAMMA])

    def upto(self, n: int) -> np.ndarray:
        if n >= len(self.values):
            size = max(n + 1, 2 * len(self.values))
            grown = np.empty(size)
            grown[: len(self.values)] = self.values
            for m in range(len(self.values), size):
                grown[m] = digamma(m)
            self.values = grown
        return self.values


PSI = _PsiTable()


@dataclass(frozen=True)
class MiEstimate:
    mi_nats: float
    entropy_nats: float
    normalized: float
    n: int
    k: int
    mi_raw: float = 0.0
    degenerate: bool = False


@dataclass
class NeighborStats:
    """Per-point neighbor quantities for one point set."""

    d: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    nx: np.ndarray
    ny: np.ndarray


def max_norm(x0, y0, x1, y1):
    return np.maximum(np.abs(x1 - x0), np.abs(y1 - y0))


# below this many points a full distance matrix beats building a tree
DENSE_LIMIT = 160


def neighbor_stats(x: np.ndarray, y: np.ndarray, k: int) -> NeighborStats:
    """k-NN distances and marginal counts for every point, from scratch."""
    n = len(x)
    if n <= k:
        raise InsufficientSamplesError(f"need more than k={k} samples, got {n}")
    if n <= DENSE_LIMIT:
        return _dense_stats(x, y, k)
    pts = np.column_stack([x, y])
    tree = cKDTree(pts)
    q = min(n, k + 2)
    _, idx = tree.query(pts, k=q, p=np.inf)
    idx = np.asarray(idx).reshape(n, q)
    rows = np.arange(n)[:, None]
    dist = max_norm(x[rows], y[rows], x[idx], y[idx])
    dist[idx == rows] = np.inf
    order = np.argsort(dist, axis=1, kind="stable")
    dist = np.take_along_axis(dist, order, axis=1)
    idx = np.take_along_axis(idx, order, axis=1)
    d = dist[:, k - 1].copy()
    near = idx[:, :k]
    dx = np.abs(x[near] - x[:, None]).max(axis=1)
    dy = np.abs(y[near] - y[:, None]).max(axis=1)

    # Rows whose (k+1)-th candidate ties with the k-th, or whose query may have
    # been crowded out by self-duplicates, are resolved by brute force.
    suspect = np.zeros(n, dtype=bool)
    if q > k:
        suspect |= dist[:, k] <= d
    suspect |= ~np.isfinite(d)
    for i in np.flatnonzero(suspect):
        di = max_norm(x[i], y[i], x, y)
        di[i] = np.inf
        dk = np.partition(di, k - 1)[k - 1]
        inside = di <= dk
        d[i] = dk
        dx[i] = np.abs(x[inside] - x[i]).max()
        dy[i] = np.abs(y[inside] - y[i]).max()

    nx = _closed_counts(x, dx)
    ny = _closed_counts(y, dy)
    return NeighborStats(d=d, dx=dx, dy=dy, nx=nx, ny=ny)


def _dense_stats(x: np.ndarray, y: np.ndarray, k: int) -> NeighborStats:
    adx = np.abs(x[:, None] - x[None, :])
    ady = np.abs(y[:, None] - y[None, :])
    dist = np.maximum(adx, ady)
    np.fill_diagonal(dist, np.inf)
    d = np.partition(dist, k - 1, axis=1)[:, k - 1]
    inside = dist <= d[:, None]
    dx = np.where(inside, adx, 0.0).max(axis=1)
    dy = np.where(inside, ady, 0.0).max(axis=1)
    # the diagonal is zero, so each row counts itself once
    nx = (adx <= dx[:, None]).sum(axis=1) - 1
    ny = (ady <= dy[:, None]).sum(axis=1) - 1
    return NeighborStats(d=d, dx=dx, dy=dy, nx=nx, ny=ny)


def _closed_counts(v: np.ndarray, radius: np.ndarray) -> np.ndarray:
    """For each i, the number of j != i with ``|v_j - v_i| <= radius_i``."""
    return strip_counts(np.sort(v), v, radius) - 1


def strip_counts(sv: np.ndarray, v: np.ndarray, radius: np.ndarray) -> np.ndarray:
    """For each i, the number of entries of sorted ``sv`` within ``radius_i`` of ``v_i``.

    The bounds ``v_i -/+ radius_i`` can round past a point sitting exactly at
    the radius, so the binary-search range is nudged until it agrees with the
    difference test. Rounded subtraction is monotone, which keeps the
    qualifying points contiguous in sorted order.
    """
    n = len(sv)
    lo = np.searchsorted(sv, v - radius, side="left")
    hi = np.searchsorted(sv, v + radius, side="right")
    while True:
        grow_lo = (lo > 0) & (np.abs(sv[np.maximum(lo - 1, 0)] - v) <= radius)
        shrink_lo = (lo < n) & (np.abs(sv[np.minimum(lo, n - 1)] - v) > radius)
        grow_hi = (hi < n) & (np.abs(sv[np.minimum(hi, n - 1)] - v) <= radius)
        shrink_hi = (hi > 0) & (np.abs(sv[np.maximum(hi - 1, 0)] - v) > radius)
        if not (grow_lo.any() or shrink_lo.any() or grow_hi.any() or shrink_hi.any()):
            break
        lo = lo - grow_lo + shrink_lo
        hi = hi + grow_hi - shrink_hi
    return hi - lo


def closed_count(sv: list, v: float, r: float) -> int:
    """Scalar twin of :func:`_closed_counts` over a sorted Python list (self excluded)."""
    n = len(sv)
    lo = bisect.bisect_left(sv, v - r)
    hi = bisect.bisect_right(sv, v + r)
    while lo > 0 and abs(sv[lo - 1] - v) <= r:
        lo -= 1
    while lo < n and abs(sv[lo] - v) > r:
        lo += 1
    while hi < n and abs(sv[hi] - v) <= r:
        hi += 1
    while hi > 0 and abs(sv[hi - 1] - v) > r:
        hi -= 1
    return hi - lo - 1


def assemble(nx: np.ndarray, ny: np.ndarray, d: np.ndarray, sx: float, sy: float,
             k: int, plus_one: bool = True) -> MiEstimate:
    """Turn per-point counts and distances into an :class:`MiEstimate`.

    Sums go through ``math.fsum`` so the result does not depend on point order.
    ``sx`` and ``sy`` are the window standard deviations; a zero spread marks
    the estimate degenerate. ``d`` is accepted for symmetry with the per-point
    records but the normalizer only needs the MI itself.
    """
    n = len(nx)
    off = 1 if plus_one else 0
    table = PSI.upto(int(max(nx.max(initial=0), ny.max(initial=0))) + 1 + n)
    if not plus_one and (nx.min(initial=1) < 1 or ny.min(initial=1) < 1):
        raise DomainError("strict counts reached zero; psi(0) is undefined")
    psi_sum = math.fsum(table[nx + off]) + math.fsum(table[ny + off])
    mi_raw = float(table[k] - 1.0 / k - psi_sum / n + table[n])
    mi = max(mi_raw, 0.0)

    # Joint entropy of the window once each marginal is mapped to normal scores:
    # H = H(X') + H(Y') - I(X';Y') = log(2 pi e) - I, since MI survives the map.
    h = LOG_2PIE - mi
    degenerate = bool(sx <= 0 or sy <= 0)
    if degenerate or h < ENTROPY_FLOOR:
        normalized = 1.0 if (not degenerate and mi > ENTROPY_FLOOR) else 0.0
        degenerate = True
    else:
        normalized = float(min(max(mi / h, 0.0), 1.0))
    return MiEstimate(mi_nats=mi, entropy_nats=h, normalized=normalized, n=n, k=k,
                      mi_raw=mi_raw, degenerate=degenerate)


def _arrays(pair_slice) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(pair_slice, TimeSeriesPair):
        return pair_slice.x, pair_slice.y
    x, y = pair_slice
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def estimate_mi(pair_slice, k: int = 4, plus_one: bool = True) -> MiEstimate:
    """KSG estimate of I(X;Y) in nats, with entropy and normalized MI filled in.

    ``plus_one=False`` feeds the raw marginal counts to the digamma function
    instead of ``count + 1``.
    """
    x, y = _arrays(pair_slice)
    ns = neighbor_stats(x, y, k)
    return assemble(ns.nx, ns.ny, ns.d, float(np.std(x)), float(np.std(y)), k, plus_one)


normalized_mi = estimate_mi


def estimate_entropy(pair_slice, k: int = 4) -> float:
    """Kozachenko-Leonenko joint differential entropy (max norm), in nats."""
    x, y = _arrays(pair_slice)
    n = len(x)
    if n < 2:
        raise InsufficientSamplesError("entropy needs at least two samples")
    k = min(k, n - 1)
    ns = neighbor_stats(x, y, k)
    if not np.all(ns.d > 0):
        raise DegenerateDataError("coincident points; joint entropy is unbounded below")
    table = PSI.upto(n)
    return float(table[n] - table[k] + 2.0 * math.fsum(np.log(2.0 * ns.d)) / n)
