"""Flat-top hexagonal lattices: point location, face states, face percolation.

Used to sanity-check the closed-form bounds at desk scale: faces are
classified from a sampled realization and their empirical state frequencies
are compared against the product-form expressions built from the envelope
areas.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .analytics import inner_envelope_area, outer_envelope_area
from .geometry import ParameterError, PointSet, Region, _as_xy, sample_ppp
from .graph import SpanningRule, activate_devices

__all__ = [
    "HexLattice",
    "FaceClassification",
    "FaceProbabilityCheck",
    "locate_face",
    "classify_subcritical",
    "classify_supercritical",
    "face_percolation",
    "max_adjacent_face_distance",
    "adjacent_connectivity_check",
    "face_probability_check",
    "SQRT13",
]

_SQRT3 = math.sqrt(3.0)
SQRT13 = math.sqrt(13.0)

# axial neighbor offsets of a face (the face-adjacency graph is triangular)
_NEIGHBOR_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))


class HexLattice:
    """Flat-top hexagonal tiling of a rectangular window, side in meters.

    Faces carry axial coordinates (q, r) with centers at
    ``(1.5 a q, sqrt(3) a (r + q/2))``. The lattice enumerates every face of
    a table generously covering the window; faces whose hexagon lies fully
    inside the window are flagged interior.
    """

    def __init__(self, side: float, region: Region):
        if side <= 0:
            raise ParameterError("side must be positive")
        self.side = float(side)
        self.region = region
        a = self.side
        self.q_min = int(math.floor(-a / (1.5 * a))) - 1
        self.q_max = int(math.ceil((region.width + a) / (1.5 * a))) + 1
        self.r_min = int(math.floor(-0.5 - self.q_max / 2.0)) - 1
        self.r_max = int(math.ceil(region.height / (_SQRT3 * a) + 0.5 - self.q_min / 2.0)) + 1
        self.nq = self.q_max - self.q_min + 1
        self.nr = self.r_max - self.r_min + 1

    @property
    def n_faces(self) -> int:
        return self.nq * self.nr

    @property
    def face_area(self) -> float:
        return 1.5 * _SQRT3 * self.side * self.side

    def face_center(self, q, r):
        q = np.asarray(q, dtype=np.float64)
        r = np.asarray(r, dtype=np.float64)
        return 1.5 * self.side * q, _SQRT3 * self.side * (r + q / 2.0)

    def face_id(self, q, r):
        return (np.asarray(q) - self.q_min) * self.nr + (np.asarray(r) - self.r_min)

    def locate(self, x, y):
        """Axial coordinates of the face containing each point.

        Cube rounding of the fractional axial coordinates; points on a face
        boundary get a deterministic assignment (round-half-even on the
        dominant cube axis).
        """
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        a = self.side
        qf = (2.0 / 3.0) * x / a
        rf = (-x / 3.0 + _SQRT3 / 3.0 * y) / a
        sf = -qf - rf
        rq = np.round(qf)
        rs = np.round(sf)
        rr = np.round(rf)
        dq = np.abs(rq - qf)
        ds = np.abs(rs - sf)
        dr = np.abs(rr - rf)
        fix_q = (dq > ds) & (dq > dr)
        fix_s = ~fix_q & (ds > dr)
        q = np.where(fix_q, -rs - rr, rq)
        r = np.where(fix_q | fix_s, rr, -rq - rs)
        return q.astype(np.int64), r.astype(np.int64)

    def face_ids_of_points(self, x, y):
        q, r = self.locate(x, y)
        return self.face_id(q, r)

    def corners(self, q: int, r: int) -> np.ndarray:
        cx, cy = self.face_center(q, r)
        ang = np.arange(6) * (math.pi / 3.0)
        return np.column_stack([cx + self.side * np.cos(ang),
                                cy + self.side * np.sin(ang)])

    def _center_grids(self):
        qs = np.arange(self.q_min, self.q_max + 1)
        rs = np.arange(self.r_min, self.r_max + 1)
        qg, rg = np.meshgrid(qs, rs, indexing="ij")
        cx, cy = self.face_center(qg.ravel(), rg.ravel())
        return cx, cy

    def interior_mask(self) -> np.ndarray:
        """Faces whose hexagon lies entirely inside the window.

        The extreme x of a flat-top hexagon is center +- side and the
        extreme y is center +- sqrt(3)/2 side, both attained at corners, so
        the bounding-box test is exact.
        """
        cx, cy = self._center_grids()
        a = self.side
        half_h = _SQRT3 / 2.0 * a
        return ((cx - a >= 0.0) & (cx + a <= self.region.width)
                & (cy - half_h >= 0.0) & (cy + half_h <= self.region.height))


def locate_face(lattice: HexLattice, point) -> tuple[int, int]:
    """Axial (q, r) of the unique face containing ``point``."""
    x, y = _as_xy(point)
    if not lattice.region.contains(x, y):
        raise ParameterError("point lies outside the lattice region")
    q, r = lattice.locate(np.array([x]), np.array([y]))
    return int(q[0]), int(r[0])


@dataclass(frozen=True)
class FaceClassification:
    """Per-face booleans over a lattice table.

    In "subcritical" mode a True flag marks an inactive face (no powered
    device inside); in "supercritical" mode it marks an active face (at
    least one powered device inside).
    """

    lattice: HexLattice
    flags: np.ndarray
    mode: str
    interior: np.ndarray


def _has_active_face_table(lattice: HexLattice, devices: PointSet,
                           stations: PointSet, r_f: float) -> np.ndarray:
    active = activate_devices(devices, stations, r_f)
    table = np.zeros(lattice.n_faces, dtype=bool)
    if len(devices):
        fid = lattice.face_ids_of_points(devices.x, devices.y)
        table[fid[active]] = True
    return table


def classify_subcritical(lattice: HexLattice, devices: PointSet, stations: PointSet,
                         r_r: float, r_f: float) -> FaceClassification:
    """Mark faces with no powered device as inactive; lattice side must be
    the link range so non-adjacent inactive faces block every link."""
    if not math.isclose(lattice.side, r_r, rel_tol=1e-9):
        raise ParameterError("subcritical classification needs lattice side == r_r")
    has_active = _has_active_face_table(lattice, devices, stations, r_f)
    return FaceClassification(lattice=lattice, flags=~has_active,
                              mode="subcritical", interior=lattice.interior_mask())


def classify_supercritical(lattice: HexLattice, devices: PointSet, stations: PointSet,
                           r_f: float) -> FaceClassification:
    """Mark faces holding at least one powered device as active."""
    has_active = _has_active_face_table(lattice, devices, stations, r_f)
    return FaceClassification(lattice=lattice, flags=has_active,
                              mode="supercritical", interior=lattice.interior_mask())


def _label_clusters(lattice: HexLattice, table: np.ndarray) -> np.ndarray:
    """Connected-cluster labels over True faces (-1 elsewhere), breadth first."""
    nq, nr = lattice.nq, lattice.nr
    labels = np.full(lattice.n_faces, -1, dtype=np.int64)
    table_list = table.tolist()
    labels_list = labels.tolist()
    next_label = 0
    for start in range(lattice.n_faces):
        if not table_list[start] or labels_list[start] >= 0:
            continue
        queue = deque([start])
        labels_list[start] = next_label
        while queue:
            f = queue.popleft()
            fq, fr = divmod(f, nr)
            for dq, dr in _NEIGHBOR_OFFSETS:
                nq_i, nr_i = fq + dq, fr + dr
                if 0 <= nq_i < nq and 0 <= nr_i < nr:
                    g = nq_i * nr + nr_i
                    if table_list[g] and labels_list[g] < 0:
                        labels_list[g] = next_label
                        queue.append(g)
        next_label += 1
    return np.asarray(labels_list, dtype=np.int64)


def face_percolation(lattice: HexLattice, classification: FaceClassification,
                     rule: SpanningRule) -> bool:
    """Face-level percolation decision.

    Supercritical mode: does some cluster of active faces span the window
    under ``rule`` (using face extents)? Subcritical mode: is the active-face
    cluster holding the window center enclosed, i.e. does it fail to reach
    the window boundary? An inactive center face counts as enclosed.
    """
    rule.check(lattice.region)
    if classification.mode == "supercritical":
        active = classification.flags
    elif classification.mode == "subcritical":
        active = ~classification.flags
    else:
        raise ParameterError(f"unknown classification mode {classification.mode!r}")
    labels = _label_clusters(lattice, active)

    if classification.mode == "subcritical":
        w, h = lattice.region.width, lattice.region.height
        q0, r0 = lattice.locate(np.array([w / 2.0]), np.array([h / 2.0]))
        center = int(lattice.face_id(q0, r0)[0])
        if not active[center]:
            return True
        members = labels == labels[center]
        return not bool(np.any(members & ~classification.interior))

    if labels.max(initial=-1) < 0:
        return False
    cx, cy = lattice._center_grids()
    a = lattice.side
    half_h = _SQRT3 / 2.0 * a
    on = labels >= 0
    lab = labels[on]
    order = np.argsort(lab, kind="stable")
    lab_sorted = lab[order]
    starts = np.concatenate([[0], np.flatnonzero(np.diff(lab_sorted)) + 1])
    fx = cx[on][order]
    fy = cy[on][order]
    min_x = np.minimum.reduceat(fx, starts) - a
    max_x = np.maximum.reduceat(fx, starts) + a
    min_y = np.minimum.reduceat(fy, starts) - half_h
    max_y = np.maximum.reduceat(fy, starts) + half_h
    m = rule.margin
    region = lattice.region
    ok = np.zeros(starts.size, dtype=bool)
    if rule.direction in ("horizontal", "either"):
        ok |= (min_x <= m) & (max_x >= region.width - m)
    if rule.direction in ("vertical", "either"):
        ok |= (min_y <= m) & (max_y >= region.height - m)
    return bool(ok.any())


def _hex_boundary_samples(side: float, center, samples_per_edge: int) -> np.ndarray:
    cx, cy = center
    ang = np.arange(7) * (math.pi / 3.0)
    corners = np.column_stack([cx + side * np.cos(ang), cy + side * np.sin(ang)])
    t = np.linspace(0.0, 1.0, samples_per_edge, endpoint=False)
    segs = [corners[k] + np.outer(t, corners[k + 1] - corners[k]) for k in range(6)]
    return np.vstack(segs)


def max_adjacent_face_distance(side: float, samples_per_edge: int = 64) -> float:
    """Largest distance between boundary samples of two edge-sharing faces."""
    if side <= 0:
        raise ParameterError("side must be positive")
    base = _hex_boundary_samples(side, (0.0, 0.0), samples_per_edge)
    best = 0.0
    for dq, dr in _NEIGHBOR_OFFSETS:
        ncx = 1.5 * side * dq
        ncy = _SQRT3 * side * (dr + dq / 2.0)
        other = _hex_boundary_samples(side, (ncx, ncy), samples_per_edge)
        d2 = ((base[:, None, :] - other[None, :, :]) ** 2).sum(axis=2)
        best = max(best, math.sqrt(float(d2.max())))
    return best


def adjacent_connectivity_check(lattice: HexLattice, samples_per_edge: int = 64,
                                rel_tol: float = 1e-9) -> bool:
    """Verify the worst-case gap between devices in adjacent faces is
    ``sqrt(13) * side`` (so a link range of that length always bridges)."""
    measured = max_adjacent_face_distance(lattice.side, samples_per_edge)
    expected = SQRT13 * lattice.side
    return abs(measured - expected) <= rel_tol * expected


@dataclass(frozen=True)
class FaceProbabilityCheck:
    """Empirical face-state frequency against its closed-form floor."""

    mode: str
    empirical: float
    bound: float
    sigma: float
    n_faces: int
    realizations: int

    @property
    def z(self) -> float:
        if self.sigma == 0.0:
            return math.inf if self.empirical >= self.bound else -math.inf
        return (self.empirical - self.bound) / self.sigma

    @property
    def satisfied(self) -> bool:
        return self.empirical >= self.bound - 3.0 * self.sigma


def _auto_region(side: float, faces_per_realization: int) -> Region:
    area = 1.5 * _SQRT3 * side * side * faces_per_realization
    length = math.sqrt(area) + 4.0 * side
    return Region(length, length)


def face_probability_check(mode: str, lambda_r: float, lambda_f: float,
                           r_r: float, r_f: float, region: Region | None = None,
                           realizations: int = 10, faces_per_realization: int = 1200,
                           master_seed: int = 0) -> FaceProbabilityCheck:
    """Estimate the face-state probability over interior faces of sampled
    realizations and compare it to the corresponding closed-form floor.

    The floor composes the empty-face probability with the chance that no
    station lands in the outer envelope (subcritical) or that some station
    lands in the inner envelope (supercritical). The spread is taken across
    realizations, which accounts for correlation between nearby faces.
    """
    if mode not in ("subcritical", "supercritical"):
        raise ParameterError("mode must be subcritical or supercritical")
    if realizations < 2:
        raise ParameterError("need at least two realizations for a spread")
    side = r_r if mode == "subcritical" else r_r / SQRT13
    if region is None:
        region = _auto_region(side, faces_per_realization)
    lattice = HexLattice(side, region)
    face_area = lattice.face_area
    p_empty = math.exp(-lambda_r * face_area)
    if mode == "subcritical":
        bound = p_empty + (1.0 - p_empty) * math.exp(-lambda_f * outer_envelope_area(r_r, r_f))
    else:
        bound = (1.0 - p_empty) * (1.0 - math.exp(-lambda_f * inner_envelope_area(r_r, r_f)))
    interior = lattice.interior_mask()
    n_interior = int(interior.sum())
    props = []
    for k in range(realizations):
        dev_seed = np.random.SeedSequence(entropy=master_seed, spawn_key=(101, k))
        sta_seed = np.random.SeedSequence(entropy=master_seed, spawn_key=(102, k))
        devices = sample_ppp(lambda_r, region, dev_seed)
        stations = sample_ppp(lambda_f, region, sta_seed)
        if mode == "subcritical":
            cls = classify_subcritical(lattice, devices, stations, r_r, r_f)
        else:
            cls = classify_supercritical(lattice, devices, stations, r_f)
        props.append(float(np.mean(cls.flags[interior])))
    props = np.asarray(props)
    empirical = float(props.mean())
    sigma = float(props.std(ddof=1) / math.sqrt(realizations))
    return FaceProbabilityCheck(mode=mode, empirical=empirical, bound=bound,
                                sigma=sigma, n_faces=n_interior * realizations,
                                realizations=realizations)
