"""Activation-aware geometric graph over a device layout.

A device is active when some station sits within the charging range ``r_f``
of it; an edge joins two active devices within the link range ``r_r`` (both
closed balls). Connected components are tracked with a union-find structure
that also carries per-component bounding boxes, so deciding whether a
component spans the window is O(1) per component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cs_labels

from .geometry import (
    GridIndex,
    ParameterError,
    PointSet,
    Region,
    _as_xy,
    pairs_within,
)

__all__ = [
    "SpanningRule",
    "DisjointSet",
    "Adjacency",
    "WcRgg",
    "activate_devices",
    "build_edges",
    "build_wc_rgg",
    "connected_components",
    "spans",
    "IncrementalWcRgg",
    "incremental_activate",
    "IncrementalRgg",
    "write_debug_dump",
]


@dataclass(frozen=True)
class SpanningRule:
    """Boundary-strip criterion for calling a component spanning.

    A component spans horizontally when its extent touches both vertical
    strips of width ``margin``; analogously for vertical. ``direction`` is
    one of "horizontal", "vertical", or "either".
    """

    margin: float
    direction: str = "either"

    def __post_init__(self):
        if self.margin < 0:
            raise ParameterError("margin must be nonnegative")
        if self.direction not in ("horizontal", "vertical", "either"):
            raise ParameterError("direction must be horizontal, vertical, or either")

    def check(self, region: Region) -> None:
        if self.margin >= min(region.width, region.height) / 2.0:
            raise ParameterError("margin must be below half the shorter region side")


class DisjointSet:
    """Union-find over device slots with per-root bounding boxes.

    Slots start dormant (size 0); ``activate`` turns a slot into a singleton
    component seeded at its coordinates. Sizes over all roots sum to the
    number of activated slots.
    """

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.size = [0] * n
        inf = math.inf
        self.min_x = [inf] * n
        self.max_x = [-inf] * n
        self.min_y = [inf] * n
        self.max_y = [-inf] * n
        self.active_count = 0

    def __len__(self) -> int:
        return len(self.parent)

    def add_slot(self) -> int:
        i = len(self.parent)
        self.parent.append(i)
        self.rank.append(0)
        self.size.append(0)
        self.min_x.append(math.inf)
        self.max_x.append(-math.inf)
        self.min_y.append(math.inf)
        self.max_y.append(-math.inf)
        return i

    def activate(self, i: int, x: float, y: float) -> None:
        if self.size[i] == 0:
            x, y = float(x), float(y)
            self.size[i] = 1
            self.min_x[i] = self.max_x[i] = x
            self.min_y[i] = self.max_y[i] = y
            self.active_count += 1

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, a: int, b: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        ra, rb = a, b
        if ra == rb:
            return ra
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.size[ra] += self.size[rb]
        if self.min_x[rb] < self.min_x[ra]:
            self.min_x[ra] = self.min_x[rb]
        if self.max_x[rb] > self.max_x[ra]:
            self.max_x[ra] = self.max_x[rb]
        if self.min_y[rb] < self.min_y[ra]:
            self.min_y[ra] = self.min_y[rb]
        if self.max_y[rb] > self.max_y[ra]:
            self.max_y[ra] = self.max_y[rb]
        return ra

    def roots(self) -> list[int]:
        """Roots of all nonempty components."""
        return [i for i, p in enumerate(self.parent) if p == i and self.size[i] > 0]

    def component_map(self) -> dict[int, list[int]]:
        """Root -> sorted member indices, over activated slots.

        Dormant slots are never unioned, so they stay size-0 roots and are
        skipped here.
        """
        out: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            r = self.find(i)
            if self.size[r] > 0:
                out.setdefault(r, []).append(i)
        return out

    def root_spans(self, root: int, region: Region, rule: SpanningRule) -> bool:
        m = rule.margin
        if rule.direction in ("horizontal", "either"):
            if self.min_x[root] <= m and self.max_x[root] >= region.width - m:
                return True
        if rule.direction in ("vertical", "either"):
            if self.min_y[root] <= m and self.max_y[root] >= region.height - m:
                return True
        return False


class Adjacency:
    """Symmetric neighbor lists over the unique edge pairs.

    The CSR arrays are built lazily; spanning-only consumers never pay for
    them.
    """

    def __init__(self, n: int, edge_i: np.ndarray, edge_j: np.ndarray):
        self.n = n
        self.edge_i = edge_i
        self.edge_j = edge_j
        self._indptr = None
        self._indices = None

    @classmethod
    def from_pairs(cls, n: int, i: np.ndarray, j: np.ndarray) -> "Adjacency":
        return cls(n, i, j)

    def _build_csr(self) -> None:
        both = np.concatenate([self.edge_i, self.edge_j])
        counts = np.bincount(both, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        order = np.argsort(both, kind="stable")
        self._indices = np.concatenate([self.edge_j, self.edge_i])[order]
        self._indptr = indptr

    def neighbors(self, i: int) -> np.ndarray:
        if self._indptr is None:
            self._build_csr()
        return self._indices[self._indptr[i]:self._indptr[i + 1]]

    @property
    def n_edges(self) -> int:
        return int(self.edge_i.size)


@dataclass(frozen=True)
class WcRgg:
    """Charging-aware random geometric graph over devices and stations."""

    devices: PointSet
    stations: PointSet
    r_r: float
    r_f: float
    active: np.ndarray
    adjacency: Adjacency


def _check_ranges(r_r: float, r_f: float) -> None:
    if r_r <= 0 or r_f <= 0:
        raise ParameterError("ranges must be positive")
    if r_r > r_f:
        raise ParameterError("r_r must not exceed r_f")


def activate_devices(devices: PointSet, stations: PointSet, r_f: float) -> np.ndarray:
    """Flag each device that has at least one station within ``r_f``."""
    if r_f <= 0:
        raise ParameterError("r_f must be positive")
    if len(stations) == 0 or len(devices) == 0:
        return np.zeros(len(devices), dtype=bool)
    index = GridIndex(stations.x, stations.y, r_f, region=stations.region)
    return index.any_within(devices.x, devices.y, r_f)


def build_edges(devices: PointSet, active: np.ndarray, r_r: float) -> Adjacency:
    """Symmetric adjacency among active devices within ``r_r`` of each other."""
    if r_r <= 0:
        raise ParameterError("r_r must be positive")
    act = np.flatnonzero(active)
    if act.size < 2:
        e = np.empty(0, dtype=np.int64)
        return Adjacency.from_pairs(len(devices), e, e)
    i, j = pairs_within(devices.x[act], devices.y[act], r_r, region=devices.region)
    return Adjacency.from_pairs(len(devices), act[i], act[j])


def build_wc_rgg(devices: PointSet, stations: PointSet, r_r: float, r_f: float) -> WcRgg:
    _check_ranges(r_r, r_f)
    active = activate_devices(devices, stations, r_f)
    adjacency = build_edges(devices, active, r_r)
    return WcRgg(devices=devices, stations=stations, r_r=r_r, r_f=r_f,
                 active=active, adjacency=adjacency)


def connected_components(graph: WcRgg) -> DisjointSet:
    """Union-find components of the graph, with extents seeded per device."""
    dsu = DisjointSet(len(graph.devices))
    xs = graph.devices.x
    ys = graph.devices.y
    for k in np.flatnonzero(graph.active).tolist():
        dsu.activate(k, xs[k], ys[k])
    union = dsu.union
    for a, b in zip(graph.adjacency.edge_i.tolist(), graph.adjacency.edge_j.tolist()):
        union(a, b)
    return dsu


def spans(dsu: DisjointSet, region: Region, rule: SpanningRule) -> bool:
    """True when some component touches opposite boundary strips."""
    rule.check(region)
    return any(dsu.root_spans(r, region, rule) for r in dsu.roots())


def spans_fast(graph: WcRgg, rule: SpanningRule) -> bool:
    """Spanning decision via sparse connected-component labels.

    Same answer as ``spans(connected_components(graph), ...)`` but the
    labeling runs in compiled code; used by the Monte-Carlo drivers.
    """
    region = graph.devices.region
    rule.check(region)
    act = np.flatnonzero(graph.active)
    if act.size == 0:
        return False
    n = len(graph.devices)
    ei, ej = graph.adjacency.edge_i, graph.adjacency.edge_j
    if ei.size:
        m = coo_matrix((np.ones(ei.size, dtype=np.int8), (ei, ej)), shape=(n, n))
        _, labels = _cs_labels(m, directed=False)
    else:
        labels = np.arange(n)
    lab = labels[act]
    order = np.argsort(lab, kind="stable")
    lab_sorted = lab[order]
    cuts = np.flatnonzero(np.diff(lab_sorted)) + 1
    starts = np.concatenate([[0], cuts])
    xs = graph.devices.x[act][order]
    ys = graph.devices.y[act][order]
    min_x = np.minimum.reduceat(xs, starts)
    max_x = np.maximum.reduceat(xs, starts)
    min_y = np.minimum.reduceat(ys, starts)
    max_y = np.maximum.reduceat(ys, starts)
    m = rule.margin
    ok = np.zeros(starts.size, dtype=bool)
    if rule.direction in ("horizontal", "either"):
        ok |= (min_x <= m) & (max_x >= region.width - m)
    if rule.direction in ("vertical", "either"):
        ok |= (min_y <= m) & (max_y >= region.height - m)
    return bool(ok.any())


class IncrementalWcRgg:
    """Graph grown one station at a time over a fixed device layout.

    Station insertion only ever activates devices and merges components, so
    spanning, once reached, is permanent; the first station count at which
    the graph spans is therefore exact for the growing station set.
    """

    def __init__(self, devices: PointSet, r_r: float, r_f: float,
                 rule: SpanningRule | None = None):
        _check_ranges(r_r, r_f)
        self.devices = devices
        self.r_r = r_r
        self.r_f = r_f
        self.rule = rule if rule is not None else SpanningRule(margin=r_r)
        self.rule.check(devices.region)
        self._index = GridIndex(devices.x, devices.y, r_r, region=devices.region)
        self.active = np.zeros(len(devices), dtype=bool)
        self.dsu = DisjointSet(len(devices))
        self.stations_added = 0
        self.spanning = False

    @property
    def all_active(self) -> bool:
        return self.dsu.active_count == len(self.devices)

    def add_station(self, sx: float, sy: float) -> DisjointSet:
        """Insert a station, activating and wiring the devices it reaches.

        Every active device within ``r_r`` of a newly powered one lies within
        ``r_f + r_r`` of the station, so one query bounds all candidate edges.
        The union workload is collapsed to a spanning set: a tree per cluster
        of new devices plus one link per (cluster, adjacent old component).
        The resulting partition and extents match the full edge set.
        """
        self.stations_added += 1
        cand = self._index.query(sx, sy, self.r_f + self.r_r)
        if cand.size == 0:
            return self.dsu
        xs, ys = self.devices.x, self.devices.y
        d2 = (xs[cand] - sx) ** 2 + (ys[cand] - sy) ** 2
        in_zone = cand[d2 <= self.r_f * self.r_f]
        new = in_zone[~self.active[in_zone]]
        if new.size == 0:
            return self.dsu
        old = cand[self.active[cand]]
        self.active[new] = True
        dsu = self.dsu
        for k in new.tolist():
            dsu.activate(k, xs[k], ys[k])
        r2 = self.r_r * self.r_r
        m = int(new.size)
        nx, ny = xs[new], ys[new]

        union_pairs: list[tuple[int, int]] = []
        if m > 1:
            dx = nx[:, None] - nx[None, :]
            dy = ny[:, None] - ny[None, :]
            pi, pj = np.nonzero((dx * dx + dy * dy <= r2) & (np.arange(m)[:, None] < np.arange(m)[None, :]))
            if pi.size:
                adj = coo_matrix((np.ones(pi.size, dtype=np.int8), (pi, pj)), shape=(m, m))
                _, labels = _cs_labels(adj, directed=False)
            else:
                labels = np.arange(m)
            # spanning tree per cluster: consecutive members in label order
            order = np.argsort(labels, kind="stable")
            same = labels[order[:-1]] == labels[order[1:]]
            for a, b in zip(new[order[:-1]][same].tolist(), new[order[1:]][same].tolist()):
                union_pairs.append((a, b))
        else:
            labels = np.zeros(1, dtype=np.int64)

        if old.size:
            dx = nx[:, None] - xs[old][None, :]
            dy = ny[:, None] - ys[old][None, :]
            ii, jj = np.nonzero(dx * dx + dy * dy <= r2)
            if ii.size:
                parent = dsu.parent
                uniq_old, inv = np.unique(old[jj], return_inverse=True)
                roots = np.empty(uniq_old.size, dtype=np.int64)
                for pos, b in enumerate(uniq_old.tolist()):
                    while parent[b] != b:
                        parent[b] = parent[parent[b]]
                        b = parent[b]
                    roots[pos] = b
                key = labels[ii] * len(self.devices) + roots[inv]
                _, first = np.unique(key, return_index=True)
                for a, b in zip(new[ii[first]].tolist(), roots[inv[first]].tolist()):
                    union_pairs.append((a, b))

        region, rule = self.devices.region, self.rule
        for a, b in union_pairs:
            root = dsu.union(a, b)
            if not self.spanning and dsu.root_spans(root, region, rule):
                self.spanning = True
        return self.dsu


def incremental_activate(graph: IncrementalWcRgg, new_station) -> DisjointSet:
    """Insert one station into a graph under construction."""
    sx, sy = _as_xy(new_station)
    return graph.add_station(sx, sy)


class IncrementalRgg:
    """Geometric graph grown point by point, every point active on arrival.

    Covers the regime where charging is never the binding constraint and
    connectivity depends on the device layout alone.
    """

    def __init__(self, r_r: float, region: Region, rule: SpanningRule | None = None):
        if r_r <= 0:
            raise ParameterError("r_r must be positive")
        self.r_r = r_r
        self.region = region
        self.rule = rule if rule is not None else SpanningRule(margin=r_r)
        self.rule.check(region)
        self.xs: list[float] = []
        self.ys: list[float] = []
        self._buckets: dict[tuple[int, int], list[int]] = {}
        self.dsu = DisjointSet(0)
        self.spanning = False

    def __len__(self) -> int:
        return len(self.xs)

    def add_point(self, x: float, y: float) -> int:
        i = self.dsu.add_slot()
        self.dsu.activate(i, x, y)
        cell = self.r_r
        cx, cy = int(x // cell), int(y // cell)
        r2 = cell * cell
        xs, ys = self.xs, self.ys
        dsu = self.dsu
        for bx in (cx - 1, cx, cx + 1):
            for by in (cy - 1, cy, cy + 1):
                bucket = self._buckets.get((bx, by))
                if not bucket:
                    continue
                for j in bucket:
                    dx = xs[j] - x
                    dy = ys[j] - y
                    if dx * dx + dy * dy <= r2:
                        root = dsu.union(i, j)
                        if not self.spanning and dsu.root_spans(root, self.region, self.rule):
                            self.spanning = True
        xs.append(x)
        ys.append(y)
        self._buckets.setdefault((cx, cy), []).append(i)
        return i


def write_debug_dump(graph: WcRgg, path) -> None:
    """Write a realization as plain text for external visualization.

    Format (one record per line, '#' lines are metadata):
      D <index> <x> <y> <active 0|1>   devices
      S <index> <x> <y>                stations
      E <i> <j>                        edges, i < j, each once
    """
    dev_x, dev_y = graph.devices.x.tolist(), graph.devices.y.tolist()
    sta_x, sta_y = graph.stations.x.tolist(), graph.stations.y.tolist()
    with open(path, "w", newline="\n") as fh:
        fh.write("# wetperc-realization-v1\n")
        fh.write(f"# region {graph.devices.region.width!r} {graph.devices.region.height!r}\n")
        fh.write(f"# r_r {float(graph.r_r)!r} r_f {float(graph.r_f)!r}\n")
        for k, (px, py) in enumerate(zip(dev_x, dev_y)):
            fh.write(f"D {k} {px!r} {py!r} {int(graph.active[k])}\n")
        for k, (px, py) in enumerate(zip(sta_x, sta_y)):
            fh.write(f"S {k} {px!r} {py!r}\n")
        for a, b in zip(graph.adjacency.edge_i.tolist(), graph.adjacency.edge_j.tolist()):
            lo, hi = (a, b) if a < b else (b, a)
            fh.write(f"E {lo} {hi}\n")
