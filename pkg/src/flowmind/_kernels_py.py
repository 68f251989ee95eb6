"""Pure-Python/numpy implementations of the hot numeric kernels.

This module mirrors the compiled extension ``flowmind._kernels`` exactly.
Arithmetic is written with the same expression order in both backends so that
results are bitwise-identical whichever one is selected.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def box_iou(
    ax0: float, ay0: float, ax1: float, ay1: float,
    bx0: float, by0: float, bx1: float, by1: float,
) -> float:
    """Intersection-over-union of two corner-form boxes (0.0 when disjoint or
    when the union has zero area)."""
    iw = min(ax1, bx1) - max(ax0, bx0)
    if iw <= 0.0:
        return 0.0
    ih = min(ay1, by1) - max(ay0, by0)
    if ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def pairwise_iou(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(n,4) x (m,4) corner boxes -> (n,m) IoU matrix."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    iw = np.maximum(iw, 0.0)
    ih = np.maximum(ih, 0.0)
    inter = iw * ih
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    out = np.zeros_like(inter)
    mask = (inter > 0.0) & (union > 0.0)
    np.divide(inter, union, out=out, where=mask)
    return out


def greedy_suppress(boxes: np.ndarray, threshold: float) -> np.ndarray:
    """Greedy suppression over boxes already sorted by priority.

    Returns a uint8 keep mask: element j is dropped when a kept earlier element
    overlaps it with IoU strictly above ``threshold``.
    """
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    n = boxes.shape[0]
    keep = np.ones(n, dtype=np.uint8)
    if n == 0:
        return keep
    iou = pairwise_iou(boxes, boxes)
    for i in range(n):
        if not keep[i]:
            continue
        for j in range(i + 1, n):
            if keep[j] and iou[i, j] > threshold:
                keep[j] = 0
    return keep


def point_segment(
    px: float, py: float, ax: float, ay: float, bx: float, by: float,
) -> tuple[float, float, float, bool, float]:
    """Distance from point to segment.

    Returns (distance, foot_x, foot_y, foot_on_segment, t) where t in [0,1] is
    the clamped parametric position of the foot along a->b.  A degenerate
    segment yields the distance to ``a`` with the flag False.
    """
    dx = bx - ax
    dy = by - ay
    seg2 = dx * dx + dy * dy
    if seg2 <= 0.0:
        ex = px - ax
        ey = py - ay
        return math.sqrt(ex * ex + ey * ey), ax, ay, False, 0.0
    t = ((px - ax) * dx + (py - ay) * dy) / seg2
    on = True
    if t < 0.0:
        t = 0.0
        on = False
    elif t > 1.0:
        t = 1.0
        on = False
    fx = ax + t * dx
    fy = ay + t * dy
    ex = px - fx
    ey = py - fy
    return math.sqrt(ex * ex + ey * ey), fx, fy, on, t


def polygon_nearest(
    px: float, py: float, verts: np.ndarray,
) -> tuple[float, float, float, int, bool, float]:
    """Nearest point on a closed polygon outline.

    Returns (distance, x, y, edge_index, foot_on_edge, t).  Distance ties keep
    the lowest edge index.
    """
    verts = np.asarray(verts, dtype=np.float64).reshape(-1, 2)
    n = verts.shape[0]
    if n == 0:
        raise ValueError("empty polygon")
    best = (math.inf, 0.0, 0.0, 0, False, 0.0)
    for i in range(n):
        j = (i + 1) % n
        d, fx, fy, on, t = point_segment(
            px, py, verts[i, 0], verts[i, 1], verts[j, 0], verts[j, 1]
        )
        if d < best[0]:
            best = (d, fx, fy, i, on, t)
    return best


def nearest_point(px: float, py: float, pts: np.ndarray) -> tuple[float, int]:
    """Nearest of a list of candidate points; ties keep the lowest index."""
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("empty point list")
    best_d = math.inf
    best_i = 0
    for i in range(n):
        ex = px - pts[i, 0]
        ey = py - pts[i, 1]
        d = math.sqrt(ex * ex + ey * ey)
        if d < best_d:
            best_d = d
            best_i = i
    return best_d, best_i


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit insert/delete/substitute costs over Unicode
    scalar values."""
    la = len(a)
    lb = len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = list(range(lb + 1))
    cur = [0] * (lb + 1)
    for i in range(1, la + 1):
        cur[0] = i
        ca = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ca == b[j - 1] else 1
            x = prev[j] + 1
            y = cur[j - 1] + 1
            z = prev[j - 1] + cost
            m = x
            if y < m:
                m = y
            if z < m:
                m = z
            cur[j] = m
        prev, cur = cur, prev
    return prev[lb]


def assign_nearest(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Assign each point to its nearest centroid by squared Euclidean distance.

    Ties pick the lowest centroid index.  Returns (labels int64, sqdists).
    """
    points = np.asarray(points, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if centroids.ndim == 1:
        centroids = centroids.reshape(-1, 1)
    if centroids.shape[0] == 0:
        raise ValueError("no centroids")
    diff = points[:, None, :] - centroids[None, :, :]
    d2 = (diff * diff).sum(axis=2)
    labels = d2.argmin(axis=1).astype(np.int64)
    sqd = d2[np.arange(points.shape[0]), labels]
    return labels, sqd
