# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot numeric kernels.

Mirrors ``flowmind._kernels_py`` exactly; arithmetic keeps the same expression
order so both backends produce bitwise-identical results.
"""

from libc.math cimport INFINITY, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


cdef inline double _d_min(double a, double b) nogil:
    return a if a < b else b


cdef inline double _d_max(double a, double b) nogil:
    return a if a > b else b


cdef inline double _iou_one(
    double ax0, double ay0, double ax1, double ay1,
    double bx0, double by0, double bx1, double by1,
) nogil:
    cdef double iw = _d_min(ax1, bx1) - _d_max(ax0, bx0)
    if iw <= 0.0:
        return 0.0
    cdef double ih = _d_min(ay1, by1) - _d_max(ay0, by0)
    if ih <= 0.0:
        return 0.0
    cdef double inter = iw * ih
    cdef double union_ = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    if inter > 0.0 and union_ > 0.0:
        return inter / union_
    return 0.0


def box_iou(double ax0, double ay0, double ax1, double ay1,
            double bx0, double by0, double bx1, double by1):
    """Intersection-over-union of two corner-form boxes (0.0 when disjoint or
    when the union has zero area)."""
    return _iou_one(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1)


def pairwise_iou(a, b):
    """(n,4) x (m,4) corner boxes -> (n,m) IoU matrix."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] aa = np.ascontiguousarray(
        np.asarray(a, dtype=np.float64).reshape(-1, 4))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] bb = np.ascontiguousarray(
        np.asarray(b, dtype=np.float64).reshape(-1, 4))
    cdef Py_ssize_t n = aa.shape[0]
    cdef Py_ssize_t m = bb.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, m), dtype=np.float64)
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(m):
            out[i, j] = _iou_one(
                aa[i, 0], aa[i, 1], aa[i, 2], aa[i, 3],
                bb[j, 0], bb[j, 1], bb[j, 2], bb[j, 3])
    return out


def greedy_suppress(boxes, double threshold):
    """Greedy suppression over boxes already sorted by priority.

    Returns a uint8 keep mask: element j is dropped when a kept earlier element
    overlaps it with IoU strictly above ``threshold``.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] bx = np.ascontiguousarray(
        np.asarray(boxes, dtype=np.float64).reshape(-1, 4))
    cdef Py_ssize_t n = bx.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] keep = np.ones(n, dtype=np.uint8)
    cdef Py_ssize_t i, j
    for i in range(n):
        if not keep[i]:
            continue
        for j in range(i + 1, n):
            if keep[j] and _iou_one(
                    bx[i, 0], bx[i, 1], bx[i, 2], bx[i, 3],
                    bx[j, 0], bx[j, 1], bx[j, 2], bx[j, 3]) > threshold:
                keep[j] = 0
    return keep


def point_segment(double px, double py, double ax, double ay,
                  double bx, double by):
    """Distance from point to segment.

    Returns (distance, foot_x, foot_y, foot_on_segment, t) where t in [0,1] is
    the clamped parametric position of the foot along a->b.  A degenerate
    segment yields the distance to ``a`` with the flag False.
    """
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double seg2 = dx * dx + dy * dy
    cdef double ex, ey, t, fx, fy
    cdef bint on
    if seg2 <= 0.0:
        ex = px - ax
        ey = py - ay
        return sqrt(ex * ex + ey * ey), ax, ay, False, 0.0
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
    return sqrt(ex * ex + ey * ey), fx, fy, bool(on), t


def polygon_nearest(double px, double py, verts):
    """Nearest point on a closed polygon outline.

    Returns (distance, x, y, edge_index, foot_on_edge, t).  Distance ties keep
    the lowest edge index.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vv = np.ascontiguousarray(
        np.asarray(verts, dtype=np.float64).reshape(-1, 2))
    cdef Py_ssize_t n = vv.shape[0]
    if n == 0:
        raise ValueError("empty polygon")
    cdef double best_d = INFINITY
    cdef double best_x = 0.0, best_y = 0.0, best_t = 0.0
    cdef Py_ssize_t best_i = 0
    cdef bint best_on = False
    cdef Py_ssize_t i, j
    cdef double d, fx, fy, t
    cdef bint on
    for i in range(n):
        j = (i + 1) % n
        d, fx, fy, on, t = point_segment(px, py, vv[i, 0], vv[i, 1], vv[j, 0], vv[j, 1])
        if d < best_d:
            best_d = d
            best_x = fx
            best_y = fy
            best_i = i
            best_on = on
            best_t = t
    return best_d, best_x, best_y, best_i, bool(best_on), best_t


def nearest_point(double px, double py, pts):
    """Nearest of a list of candidate points; ties keep the lowest index."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pp = np.ascontiguousarray(
        np.asarray(pts, dtype=np.float64).reshape(-1, 2))
    cdef Py_ssize_t n = pp.shape[0]
    if n == 0:
        raise ValueError("empty point list")
    cdef double best_d = INFINITY
    cdef Py_ssize_t best_i = 0
    cdef Py_ssize_t i
    cdef double ex, ey, d
    for i in range(n):
        ex = px - pp[i, 0]
        ey = py - pp[i, 1]
        d = sqrt(ex * ex + ey * ey)
        if d < best_d:
            best_d = d
            best_i = i
    return best_d, best_i


def levenshtein(str a, str b):
    """Edit distance with unit insert/delete/substitute costs over Unicode
    scalar values."""
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ia = np.frombuffer(
        a.encode("utf-32-le"), dtype="<u4").astype(np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ib = np.frombuffer(
        b.encode("utf-32-le"), dtype="<u4").astype(np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] prev = np.arange(lb + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cur = np.zeros(lb + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] tmp
    cdef Py_ssize_t i, j
    cdef cnp.int64_t ca, cost, x, y, z, m
    for i in range(1, la + 1):
        cur[0] = i
        ca = ia[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ca == ib[j - 1] else 1
            x = prev[j] + 1
            y = cur[j - 1] + 1
            z = prev[j - 1] + cost
            m = x
            if y < m:
                m = y
            if z < m:
                m = z
            cur[j] = m
        tmp = prev
        prev = cur
        cur = tmp
    return int(prev[lb])


def assign_nearest(points, centroids):
    """Assign each point to its nearest centroid by squared Euclidean distance.

    Ties pick the lowest centroid index.  Returns (labels int64, sqdists).
    """
    pts = np.asarray(points, dtype=np.float64)
    cen = np.asarray(centroids, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if cen.ndim == 1:
        cen = cen.reshape(-1, 1)
    if cen.shape[0] == 0:
        raise ValueError("no centroids")
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.ascontiguousarray(pts)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] c = np.ascontiguousarray(cen)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t k = c.shape[0]
    cdef Py_ssize_t d = p.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] labels = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sqd = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t i, cc, j
    cdef double s, diff, best
    cdef Py_ssize_t best_i
    for i in range(n):
        best = INFINITY
        best_i = 0
        for cc in range(k):
            s = 0.0
            for j in range(d):
                diff = p[i, j] - c[cc, j]
                s = s + diff * diff
            if s < best:
                best = s
                best_i = cc
        labels[i] = best_i
        sqd[i] = best
    return labels, sqd
