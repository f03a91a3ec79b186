"""2-D convex set geometry: hulls, Minkowski sums, Hausdorff distance.

Regions are convex point sets represented by their hull vertices.  The hull
routine is Andrew's monotone chain, which handles degenerate inputs (single
points, collinear clouds) without external dependencies; all downstream
distance computations work on the closed convex polygon, segment, or point
that results.
"""
from __future__ import annotations

import numpy as np

from .errors import SpecError


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Hull vertices in counterclockwise order starting at the lexicographic
    minimum; degenerate inputs yield fewer than 3 vertices."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise SpecError("convex hull of an empty point set")
    uniq = np.unique(pts, axis=0)  # sorts lexicographically
    if uniq.shape[0] <= 2:
        return uniq

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in uniq:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in uniq[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 0:  # fully collinear cloud
        return np.stack([uniq[0], uniq[-1]])
    return np.stack(hull)


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.hypot(*(p - a)))
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    proj = a + t * ab
    return float(np.hypot(*(p - proj)))


def contains_point(hull: np.ndarray, p, tol: float = 1e-12) -> bool:
    """Membership in the closed convex set spanned by CCW hull vertices."""
    hull = np.asarray(hull, dtype=float)
    p = np.asarray(p, dtype=float)
    k = hull.shape[0]
    if k == 1:
        return bool(np.hypot(*(p - hull[0])) <= tol)
    if k == 2:
        return _point_segment_distance(p, hull[0], hull[1]) <= tol
    for i in range(k):
        a, b = hull[i], hull[(i + 1) % k]
        cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if cross < -tol * max(1.0, np.abs(hull).max()):
            return False
    return True


def point_to_hull_distance(p, hull: np.ndarray) -> float:
    hull = np.asarray(hull, dtype=float)
    p = np.asarray(p, dtype=float)
    if contains_point(hull, p):
        return 0.0
    k = hull.shape[0]
    if k == 1:
        return float(np.hypot(*(p - hull[0])))
    return min(_point_segment_distance(p, hull[i], hull[(i + 1) % k]) for i in range(k))


def hausdorff_distance(hull_a: np.ndarray, hull_b: np.ndarray) -> float:
    """Hausdorff distance between two closed convex sets given by hulls.

    For convex sets the sup of the point-to-set distance over one set is
    attained at a vertex, so scanning vertices is exact.
    """
    a = np.asarray(hull_a, dtype=float)
    b = np.asarray(hull_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise SpecError("Hausdorff distance of an empty region")
    d_ab = max(point_to_hull_distance(p, b) for p in a)
    d_ba = max(point_to_hull_distance(p, a) for p in b)
    return max(d_ab, d_ba)


def minkowski_sum(hull_a: np.ndarray, hull_b: np.ndarray) -> np.ndarray:
    """Hull of the pairwise vertex sums (exact for convex summands)."""
    a = np.asarray(hull_a, dtype=float)
    b = np.asarray(hull_b, dtype=float)
    sums = (a[:, None, :] + b[None, :, :]).reshape(-1, 2)
    return convex_hull(sums)


def scale(hull: np.ndarray, c: float) -> np.ndarray:
    if c < 0:
        raise SpecError("scale factor must be >= 0")
    return convex_hull(np.asarray(hull, dtype=float) * c)
