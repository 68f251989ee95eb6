"""Two-stage auto-layout: unify near-identical shape sizes, then snap
near-collinear centers into alignment.

Both stages cluster with a canopy pass (which picks the number of clusters
and the seeds) followed by Lloyd's K-means iteration:

* stage 1 clusters (width, height) pairs; the tight threshold T2 is
  min(width^2 + height^2) / divisor — a squared quantity, compared against
  squared distances — and every shape in a cluster takes the cluster's mean
  size, keeping its center fixed;
* stage 2 clusters x-centers and y-centers independently with
  T2 = min(width) / divisor resp. min(height) / divisor (plain lengths), and
  every shape in a cluster moves to the cluster's mean coordinate.

Bound connector endpoints are re-derived from their stored site identity
against the moved outline, so an edge keeps entering a shape at the same
site after layout.  All work is in inches.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from flowmind import kernels
from flowmind.connect import Bound, anchor_position
from flowmind.document import DiagramDoc, copy_document
from flowmind.geometry import CenterBox, center_to_corner

GOLDEN_DIVISOR = 1.618


@dataclass(frozen=True)
class LayoutConfig:
    """Thresholds are in inches (T2 values are derived per document).

    stage1_t1 / stage2_t1 are the loose canopy radii; t2_divisor scales the
    per-document tight radius; K-means stops after kmeans_max_iters or when
    no centroid moves by kmeans_tol or more.
    """

    dpi: float = 96.0
    stage1_t1: float = 1.0
    stage2_t1: float = 0.8
    t2_divisor: float = GOLDEN_DIVISOR
    kmeans_max_iters: int = 100
    kmeans_tol: float = 1e-6
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.dpi <= 0:
            raise ValueError(f"dpi must be > 0, got {self.dpi}")
        if self.stage1_t1 <= 0 or self.stage2_t1 <= 0:
            raise ValueError("canopy T1 radii must be > 0")
        if self.t2_divisor <= 0:
            raise ValueError(f"t2_divisor must be > 0, got {self.t2_divisor}")
        if self.kmeans_max_iters < 1:
            raise ValueError("kmeans_max_iters must be >= 1")
        if self.kmeans_tol <= 0:
            raise ValueError("kmeans_tol must be > 0")


def canopy(
    features: np.ndarray, t1: float, t2: float, squared_t2: bool = False
) -> np.ndarray:
    """Canopy clustering: returns the cluster centers (a subset of the input
    points) in canonical order.

    Points are processed sorted lexicographically by feature vector, then by
    input index; the first unremoved point becomes a center and removes every
    point within T2 of it (itself included).  With ``squared_t2`` the t2
    value is compared against squared distances (t1 is always a plain
    radius).  T1 affects only loose canopy membership, which no downstream
    step uses, so only T2 shapes the result.
    """
    pts = np.asarray(features, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    n = pts.shape[0]
    if n == 0:
        return pts.reshape(0, pts.shape[1] if pts.ndim > 1 else 1)
    order = sorted(range(n), key=lambda i: (tuple(pts[i]), i))
    t2_sq = t2 if squared_t2 else t2 * t2
    removed = [False] * n
    centers: list[int] = []
    for oi in order:
        if removed[oi]:
            continue
        centers.append(oi)
        c = pts[oi]
        for oj in order:
            if removed[oj]:
                continue
            diff = pts[oj] - c
            d2 = float(diff @ diff)
            if d2 <= t2_sq:
                removed[oj] = True
    return pts[centers]


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    objective_history: list[float] = field(default_factory=list)
    iterations: int = 0


def kmeans(
    features: np.ndarray,
    centers: np.ndarray,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> KMeansResult:
    """Lloyd's iteration from the given seed centers.

    Assignment ties go to the lowest centroid index.  An empty cluster is
    reseeded with the point currently worst-fit by its own centroid (ties:
    lowest point index), processed in ascending cluster index.  The recorded
    objective (sum of squared distances after each assignment) never
    increases; iteration stops when no centroid moves by ``tol`` or more, or
    after ``max_iters`` iterations.
    """
    pts = np.asarray(features, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    cen = np.array(centers, dtype=np.float64)
    if cen.ndim == 1:
        cen = cen.reshape(-1, 1)
    if cen.shape[0] == 0:
        raise ValueError("kmeans requires at least one seed center")
    if pts.shape[0] == 0:
        return KMeansResult(np.zeros(0, dtype=np.int64), cen, [], 0)

    history: list[float] = []
    result_labels = np.zeros(pts.shape[0], dtype=np.int64)
    k = cen.shape[0]
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        labels, sqd = kernels.assign_nearest(pts, cen)
        counts = np.bincount(labels, minlength=k)
        if (counts == 0).any():
            sqd = sqd.copy()
            for c in range(k):
                if counts[c] == 0:
                    worst = int(np.argmax(sqd))
                    cen[c] = pts[worst]
                    sqd[worst] = -1.0
            labels, sqd = kernels.assign_nearest(pts, cen)
        history.append(float(sqd.sum()))
        result_labels = labels
        new_cen = cen.copy()
        for c in range(k):
            members = np.flatnonzero(labels == c)
            if members.size:
                new_cen[c] = pts[members].mean(axis=0)
        move = float(np.sqrt(((new_cen - cen) ** 2).sum(axis=1)).max())
        cen = new_cen
        if move < tol:
            break
    return KMeansResult(result_labels, cen, history, iterations)


@dataclass
class StageReport:
    """Echo of one clustering stage: effective thresholds, cluster count,
    and the K-means trace."""

    t1: float
    t2: float
    k: int
    iterations: int
    objective_history: list[float] = field(default_factory=list)


@dataclass
class LayoutReport:
    enabled: bool
    config: LayoutConfig
    resize: Optional[StageReport] = None
    align_x: Optional[StageReport] = None
    align_y: Optional[StageReport] = None


def _cluster_values(
    features: np.ndarray,
    t1: float,
    t2: float,
    squared_t2: bool,
    config: LayoutConfig,
) -> tuple[np.ndarray, StageReport]:
    """Cluster features and return each point's cluster centroid."""
    centers = canopy(features, t1, t2, squared_t2=squared_t2)
    res = kmeans(features, centers, config.kmeans_max_iters, config.kmeans_tol)
    report = StageReport(
        t1=t1,
        t2=t2,
        k=centers.shape[0],
        iterations=res.iterations,
        objective_history=res.objective_history,
    )
    return res.centroids[res.labels], report


def resize_shapes(doc: DiagramDoc, config: LayoutConfig) -> StageReport:
    """Stage 1: cluster (width, height) and set every shape to its cluster's
    mean size, center unchanged.  Mutates ``doc``."""
    if not doc.shapes:
        return StageReport(t1=config.stage1_t1, t2=0.0, k=0, iterations=0)
    feats = np.array([(s.box.width, s.box.height) for s in doc.shapes], dtype=np.float64)
    t2 = float(min(w * w + h * h for w, h in feats) / config.t2_divisor)
    assigned, report = _cluster_values(feats, config.stage1_t1, t2, True, config)
    for node, (w, h) in zip(doc.shapes, assigned):
        node.box = CenterBox(node.box.xc, node.box.yc, float(w), float(h))
    return report


def align_shapes(doc: DiagramDoc, config: LayoutConfig) -> tuple[StageReport, StageReport]:
    """Stage 2: cluster x-centers and y-centers independently and move every
    shape to its cluster's mean coordinate.  Mutates ``doc``."""
    if not doc.shapes:
        empty = StageReport(t1=config.stage2_t1, t2=0.0, k=0, iterations=0)
        return empty, empty
    xs = np.array([s.box.xc for s in doc.shapes], dtype=np.float64)
    ys = np.array([s.box.yc for s in doc.shapes], dtype=np.float64)
    t2x = float(min(s.box.width for s in doc.shapes) / config.t2_divisor)
    t2y = float(min(s.box.height for s in doc.shapes) / config.t2_divisor)
    new_x, rep_x = _cluster_values(xs, config.stage2_t1, t2x, False, config)
    new_y, rep_y = _cluster_values(ys, config.stage2_t1, t2y, False, config)
    for node, nx, ny in zip(doc.shapes, new_x, new_y):
        node.box = CenterBox(float(nx[0]), float(ny[0]), node.box.width, node.box.height)
    return rep_x, rep_y


def _rebind_endpoints(doc: DiagramDoc) -> None:
    """Recompute bound endpoint positions from their stored site identity
    against the post-layout outlines."""
    by_id = {s.id: s for s in doc.shapes}
    for edge in doc.connectors:
        for attr in ("from_binding", "to_binding"):
            binding = getattr(edge, attr)
            if not isinstance(binding, Bound):
                continue
            node = by_id.get(binding.anchor.shape_id)
            if node is None:
                continue
            pos = anchor_position(
                node.cls,
                center_to_corner(node.box),
                binding.anchor.site_index,
                binding.anchor.edge_t,
            )
            setattr(
                edge,
                attr,
                Bound(
                    anchor=type(binding.anchor)(
                        shape_id=binding.anchor.shape_id,
                        site_index=binding.anchor.site_index,
                        position=pos,
                        edge_t=binding.anchor.edge_t,
                    ),
                    distance=binding.distance,
                ),
            )


def autotypeset(doc: DiagramDoc, config: LayoutConfig = LayoutConfig()) -> tuple[DiagramDoc, LayoutReport]:
    """Run both layout stages on a copy of ``doc``.

    Disabled layout returns an unchanged copy.  Bound connector endpoints
    keep their site indices; their positions follow the moved shapes.
    """
    out = copy_document(doc)
    if not config.enabled:
        return out, LayoutReport(enabled=False, config=config)
    resize_rep = resize_shapes(out, config)
    align_x_rep, align_y_rep = align_shapes(out, config)
    _rebind_endpoints(out)
    return out, LayoutReport(
        enabled=True,
        config=config,
        resize=resize_rep,
        align_x=align_x_rep,
        align_y=align_y_rep,
    )
