"""Dominance, non-dominated sorting, crowding distance, and 2-D hypervolume.

Both objectives are minimized.  Points are (n, 2) float arrays in seconds;
functions also accept sequences of pairs.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import ValidationError


class Dominance(enum.Enum):
    STRONG = "strong"
    WEAK_EQUAL = "weak_equal"
    NONE = "none"


def dominates(u, v) -> Dominance:
    """STRONG iff u <= v component-wise with at least one strict inequality;
    WEAK_EQUAL iff u == v; NONE otherwise."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if np.array_equal(u, v):
        return Dominance.WEAK_EQUAL
    if np.all(u <= v):
        return Dominance.STRONG
    return Dominance.NONE


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError(f"expected an (n, 2) point array, got shape {pts.shape}")
    return pts


def _dominance_matrix(pts: np.ndarray) -> np.ndarray:
    """dom[i, j] is True iff point i strongly dominates point j."""
    le = (pts[:, None, :] <= pts[None, :, :]).all(axis=2)
    lt = (pts[:, None, :] < pts[None, :, :]).any(axis=2)
    return le & lt


def non_dominated_sort(points) -> list[list[int]]:
    """Fast non-dominated sort; returns fronts of input indices, rank 0 first."""
    pts = _as_points(points)
    n = len(pts)
    if n == 0:
        return []
    dom = _dominance_matrix(pts)
    dominated_count = dom.sum(axis=0)  # how many points dominate i

    fronts: list[list[int]] = []
    assigned = np.zeros(n, dtype=bool)
    current = np.flatnonzero(dominated_count == 0)
    while current.size:
        fronts.append(current.tolist())
        assigned[current] = True
        dominated_count = dominated_count - dom[current].sum(axis=0)
        current = np.flatnonzero((dominated_count == 0) & ~assigned)
    return fronts


def nondominated_mask(points) -> np.ndarray:
    """Boolean mask of points strongly dominated by no other point.

    O(n log n) staircase sweep; duplicates of a frontier point all count as
    non-dominated.
    """
    pts = _as_points(points)
    n = len(pts)
    mask = np.zeros(n, dtype=bool)
    if n == 0:
        return mask
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    best_f2 = np.inf  # min f2 among strictly-smaller f1 groups
    i = 0
    while i < n:
        j = i
        while j < n and pts[order[j], 0] == pts[order[i], 0]:
            j += 1
        group = order[i:j]
        group_min = pts[group, 1].min()
        if group_min < best_f2:
            mask[group[pts[group, 1] == group_min]] = True
            best_f2 = group_min
        i = j
    return mask


def crowding_distance(points) -> np.ndarray:
    """Crowding distances for one front.

    A point whose value equals the front's min or max in either objective is
    a boundary point and gets inf (with all points equal, everyone does).
    Interior points sum, per objective, neighbor gap over objective range;
    a zero-range objective contributes 0.  Duplicated objective points get 0
    unless they are boundary.
    """
    pts = _as_points(points)
    n = len(pts)
    if n == 0:
        return np.zeros(0)
    dist = np.zeros(n)
    boundary = np.zeros(n, dtype=bool)
    for obj in range(2):
        v = pts[:, obj]
        vmin, vmax = v.min(), v.max()
        boundary |= (v == vmin) | (v == vmax)
        span = vmax - vmin
        if span == 0 or n < 3:
            continue
        order = np.argsort(v, kind="stable")
        interior = order[1:-1]
        dist[interior] += (v[order[2:]] - v[order[:-2]]) / span

    _, inverse, counts = np.unique(pts, axis=0, return_inverse=True, return_counts=True)
    dist[counts[inverse] > 1] = 0.0
    dist[boundary] = np.inf
    return dist


def hypervolume_2d(points, ref) -> float:
    """Area of objective space dominated by ``points`` inside the ref box.

    Computed as the union of the rectangles [f1, r1] x [f2, r2] via a sweep
    over f1-sorted points; every point must be within the reference box.
    """
    pts = _as_points(points)
    r1, r2 = float(ref[0]), float(ref[1])
    if len(pts) == 0:
        return 0.0
    if np.any(pts[:, 0] > r1) or np.any(pts[:, 1] > r2):
        raise ValidationError("reference point does not bound the front")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    area = 0.0
    best_f2 = r2
    for idx in order:
        f1, f2 = pts[idx]
        if f2 < best_f2:
            area += (r1 - f1) * (best_f2 - f2)
            best_f2 = f2
    return area
