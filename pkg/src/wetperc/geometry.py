"""Planar Poisson point processes and fixed-radius neighbor search.

Everything operates on an axis-aligned rectangular window anchored at the
origin. Distance comparisons are closed (``<= radius``) and done on squared
distances; ties at the exact radius count as neighbors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParameterError",
    "Region",
    "Point",
    "PointSet",
    "GridIndex",
    "sample_ppp",
    "build_grid_index",
    "neighbors_within",
    "pairs_within",
]


class ParameterError(ValueError):
    """An argument is outside the domain an operation supports."""


@dataclass(frozen=True)
class Region:
    """Rectangular window [0, width] x [0, height], sides in meters."""

    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0.0 and self.height > 0.0):
            raise ParameterError("region sides must be positive")

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


@dataclass(frozen=True)
class Point:
    x: float
    y: float


def _as_xy(point) -> tuple[float, float]:
    if isinstance(point, Point):
        return point.x, point.y
    x, y = point
    return float(x), float(y)


@dataclass(frozen=True)
class PointSet:
    """A realization of a point process inside a region.

    Coordinates live in parallel read-only arrays. ``seed`` records whatever
    was passed to the sampler so a realization can be regenerated.
    """

    x: np.ndarray
    y: np.ndarray
    region: Region
    density: float
    seed: object = None

    def __post_init__(self):
        if self.x.shape != self.y.shape:
            raise ParameterError("coordinate arrays must have equal length")
        self.x.setflags(write=False)
        self.y.setflags(write=False)

    def __len__(self) -> int:
        return int(self.x.size)

    @property
    def points(self) -> list[Point]:
        return [Point(float(a), float(b)) for a, b in zip(self.x, self.y)]


def sample_ppp(density: float, region: Region, seed) -> PointSet:
    """Sample a homogeneous Poisson point process on ``region``.

    Draws ``N ~ Poisson(density * area)`` then N i.i.d. uniform points.
    Deterministic for a given seed (int or ``numpy.random.SeedSequence``).
    """
    if density < 0:
        raise ParameterError("density must be nonnegative")
    rng = np.random.default_rng(seed)
    n = rng.poisson(density * region.area)
    x = rng.uniform(0.0, region.width, n)
    y = rng.uniform(0.0, region.height, n)
    return PointSet(x=x, y=y, region=region, density=float(density), seed=seed)


class GridIndex:
    """Uniform-cell bucket index over a fixed set of points.

    Points are bucketed by ``floor(coord / cell_size)``, clamped into the
    cell range covering the window, so every point lands in exactly one
    bucket. A radius-``r`` query scans the ``ceil(r / cell_size)``-cell
    neighborhood of the query cell, which reduces to the 3x3 block when
    ``r <= cell_size``.
    """

    def __init__(self, x, y, cell_size: float, region: Region | None = None):
        if cell_size <= 0:
            raise ParameterError("cell_size must be positive")
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.float64)
        if self.x.shape != self.y.shape:
            raise ParameterError("coordinate arrays must have equal length")
        self.cell_size = float(cell_size)
        self.n = int(self.x.size)
        if region is not None:
            w, h = region.width, region.height
        else:
            w = float(self.x.max()) if self.n else self.cell_size
            h = float(self.y.max()) if self.n else self.cell_size
        self.nx = max(1, int(math.ceil(w / self.cell_size)))
        self.ny = max(1, int(math.ceil(h / self.cell_size)))
        ix = np.clip(np.floor(self.x / self.cell_size).astype(np.int64), 0, self.nx - 1)
        iy = np.clip(np.floor(self.y / self.cell_size).astype(np.int64), 0, self.ny - 1)
        key = ix * self.ny + iy
        self._order = np.argsort(key, kind="stable")
        self._skey = key[self._order]
        self._buckets = None

    @property
    def buckets(self) -> dict[tuple[int, int], np.ndarray]:
        """Map from integer cell coordinates to the point indices it holds."""
        if self._buckets is None:
            out = {}
            if self.n:
                keys, starts = np.unique(self._skey, return_index=True)
                bounds = np.append(starts, self.n)
                for k, lo, hi in zip(keys, bounds[:-1], bounds[1:]):
                    cell = (int(k // self.ny), int(k % self.ny))
                    out[cell] = self._order[lo:hi]
            self._buckets = out
        return self._buckets

    def _row_range(self, row: int, iy_lo: int, iy_hi: int) -> np.ndarray:
        base = row * self.ny
        lo = np.searchsorted(self._skey, base + iy_lo, side="left")
        hi = np.searchsorted(self._skey, base + iy_hi, side="right")
        return self._order[lo:hi]

    def query(self, cx: float, cy: float, radius: float) -> np.ndarray:
        """Indices of all points with ``dist((cx, cy), p) <= radius``."""
        if radius < 0 or self.n == 0:
            return np.empty(0, dtype=np.int64)
        m = int(math.ceil(radius / self.cell_size))
        qix = int(math.floor(cx / self.cell_size))
        qiy = int(math.floor(cy / self.cell_size))
        iy_lo = max(qiy - m, 0)
        iy_hi = min(qiy + m, self.ny - 1)
        if iy_lo > iy_hi:
            return np.empty(0, dtype=np.int64)
        chunks = []
        for row in range(max(qix - m, 0), min(qix + m, self.nx - 1) + 1):
            run = self._row_range(row, iy_lo, iy_hi)
            if run.size:
                chunks.append(run)
        if not chunks:
            return np.empty(0, dtype=np.int64)
        cand = np.concatenate(chunks)
        d2 = (self.x[cand] - cx) ** 2 + (self.y[cand] - cy) ** 2
        return cand[d2 <= radius * radius]

    def any_within(self, qx, qy, radius: float) -> np.ndarray:
        """Boolean per query point: is any indexed point within ``radius``?"""
        qx = np.ascontiguousarray(qx, dtype=np.float64)
        qy = np.ascontiguousarray(qy, dtype=np.float64)
        out = np.zeros(qx.size, dtype=bool)
        if self.n == 0 or qx.size == 0 or radius < 0:
            return out
        m = int(math.ceil(radius / self.cell_size))
        r2 = radius * radius
        qix = np.floor(qx / self.cell_size).astype(np.int64)
        qiy = np.floor(qy / self.cell_size).astype(np.int64)
        iy_lo = np.maximum(qiy - m, 0)
        iy_hi = np.minimum(qiy + m, self.ny - 1)
        col_ok = iy_lo <= iy_hi
        for dx in range(-m, m + 1):
            rows = qix + dx
            ok = col_ok & (rows >= 0) & (rows < self.nx) & ~out
            idxq = np.flatnonzero(ok)
            if idxq.size == 0:
                continue
            base = rows[idxq] * self.ny
            starts = np.searchsorted(self._skey, base + iy_lo[idxq], side="left")
            ends = np.searchsorted(self._skey, base + iy_hi[idxq], side="right")
            grp, pos = _gather_ranges(starts, ends)
            if pos.size == 0:
                continue
            cand = self._order[pos]
            hit = (self.x[cand] - qx[idxq][grp]) ** 2 + (self.y[cand] - qy[idxq][grp]) ** 2 <= r2
            out[idxq[grp[hit]]] = True
        return out


def _gather_ranges(starts: np.ndarray, ends: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Expand per-query [start, end) ranges into (query id, flat position) pairs."""
    counts = ends - starts
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    grp = np.repeat(np.arange(starts.size), counts)
    base = np.repeat(starts, counts)
    offset = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return grp, base + offset


def build_grid_index(points: PointSet, cell_size: float) -> GridIndex:
    """Index a point set for fixed-radius queries."""
    return GridIndex(points.x, points.y, cell_size, region=points.region)


def neighbors_within(index: GridIndex, center, radius: float) -> np.ndarray:
    """Indices of indexed points inside the closed ball around ``center``."""
    cx, cy = _as_xy(center)
    return index.query(cx, cy, radius)


_PAIR_OFFSETS = ((0, 0), (1, 0), (0, 1), (1, 1), (1, -1))


def pairs_within(x, y, radius: float, region: Region | None = None):
    """All unordered index pairs at distance <= radius, as (i, j) arrays with i < j.

    Cell-sweep over a transient grid with cell size equal to the radius; each
    qualifying pair is produced exactly once.
    """
    if radius <= 0:
        raise ParameterError("radius must be positive")
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = x.size
    if n < 2:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    idx = GridIndex(x, y, radius, region=region)
    ix = np.clip(np.floor(x / idx.cell_size).astype(np.int64), 0, idx.nx - 1)
    iy = np.clip(np.floor(y / idx.cell_size).astype(np.int64), 0, idx.ny - 1)
    pos_of = np.empty(n, dtype=np.int64)
    pos_of[idx._order] = np.arange(n)
    r2 = radius * radius
    out_i, out_j = [], []
    for dx, dy in _PAIR_OFFSETS:
        rows = ix + dx
        cols = iy + dy
        ok = (rows >= 0) & (rows < idx.nx) & (cols >= 0) & (cols < idx.ny)
        src = np.flatnonzero(ok)
        if src.size == 0:
            continue
        key2 = rows[src] * idx.ny + cols[src]
        starts = np.searchsorted(idx._skey, key2, side="left")
        ends = np.searchsorted(idx._skey, key2, side="right")
        if dx == 0 and dy == 0:
            # same cell: only partners after this point in sorted order
            starts = np.maximum(starts, pos_of[src] + 1)
            ends = np.maximum(ends, starts)
        grp, pos = _gather_ranges(starts, ends)
        if pos.size == 0:
            continue
        i = src[grp]
        j = idx._order[pos]
        close = (x[i] - x[j]) ** 2 + (y[i] - y[j]) ** 2 <= r2
        i, j = i[close], j[close]
        out_i.append(np.minimum(i, j))
        out_j.append(np.maximum(i, j))
    if not out_i:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(out_i), np.concatenate(out_j)
