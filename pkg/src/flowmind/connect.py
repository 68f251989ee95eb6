"""Connection resolution: snap connector keypoints to shape anchor sites.

Every shape class has a standardized outline derived from its box:

* polygon classes (rectangle, diamond, triangle, parallelogram, trapezoid,
  hexagon) expose their outline edges; the anchor site is the nearest point on
  the nearest edge, identified by (edge_index, parametric t);
* the ellipse family (circle, long_oval) exposes exactly eight candidate
  points in the fixed order up, down, left, right, top-left, bottom-left,
  top-right, bottom-right, with the diagonals on the inscribed ellipse at its
  parametric 45-degree points.

Each connector endpoint binds to the globally nearest anchor across all
shapes (ties: lower shape id, then lower site index) or stays free when no
shape exists or the nearest distance exceeds ``max_bind_distance``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from flowmind import kernels
from flowmind.geometry import (
    CornerBox,
    Detection,
    ElementClass,
    Point,
    is_connector,
    is_shape,
)


class NotAShape(ValueError):
    """Raised when an outline is requested for a non-shape class."""


_HALF_SQRT2 = math.sqrt(2.0) / 2.0

# Fraction of the width by which slanted polygon corners are inset.
SLANT_INSET = 0.25

# Candidate-site order for the ellipse family; indices are contractual.
ELLIPSE_SITE_NAMES = (
    "up",
    "down",
    "left",
    "right",
    "top_left",
    "bottom_left",
    "top_right",
    "bottom_right",
)

POLYGON_CLASSES = frozenset(
    {
        ElementClass.RECTANGLE,
        ElementClass.DIAMOND,
        ElementClass.TRIANGLE,
        ElementClass.PARALLELOGRAM,
        ElementClass.TRAPEZOID,
        ElementClass.HEXAGON,
    }
)

ELLIPSE_CLASSES = frozenset({ElementClass.CIRCLE, ElementClass.LONG_OVAL})


@dataclass(frozen=True)
class Outline:
    """Standardized outline: a closed polygon's vertices, or the ellipse
    family's candidate points."""

    kind: str  # "polygon" | "points"
    points: tuple[Point, ...]


def polygon_vertices(cls: ElementClass, box: CornerBox) -> tuple[Point, ...]:
    x0, y0, x1, y1 = box.as_tuple()
    xc = (x0 + x1) / 2.0
    yc = (y0 + y1) / 2.0
    w = x1 - x0
    inset = SLANT_INSET * w
    if cls is ElementClass.RECTANGLE:
        return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))
    if cls is ElementClass.DIAMOND:
        return ((xc, y0), (x1, yc), (xc, y1), (x0, yc))
    if cls is ElementClass.TRIANGLE:
        return ((xc, y0), (x1, y1), (x0, y1))
    if cls is ElementClass.PARALLELOGRAM:
        return ((x0 + inset, y0), (x1, y0), (x1 - inset, y1), (x0, y1))
    if cls is ElementClass.TRAPEZOID:
        return ((x0 + inset, y0), (x1 - inset, y0), (x1, y1), (x0, y1))
    if cls is ElementClass.HEXAGON:
        half = inset  # hexagon cap: quarter-width on each side of center
        return (
            (xc - half, y0),
            (xc + half, y0),
            (x1, yc),
            (xc + half, y1),
            (xc - half, y1),
            (x0, yc),
        )
    raise NotAShape(f"no polygon outline for {cls}")


def ellipse_sites(box: CornerBox) -> tuple[Point, ...]:
    x0, y0, x1, y1 = box.as_tuple()
    xc = (x0 + x1) / 2.0
    yc = (y0 + y1) / 2.0
    rx = (x1 - x0) / 2.0
    ry = (y1 - y0) / 2.0
    dx = rx * _HALF_SQRT2
    dy = ry * _HALF_SQRT2
    return (
        (xc, y0),            # up
        (xc, y1),            # down
        (x0, yc),            # left
        (x1, yc),            # right
        (xc - dx, yc - dy),  # top-left
        (xc - dx, yc + dy),  # bottom-left
        (xc + dx, yc - dy),  # top-right
        (xc + dx, yc + dy),  # bottom-right
    )


def shape_outline(cls: ElementClass, box: CornerBox) -> Outline:
    """The standardized outline for a shape class; raises NotAShape for
    connectors and text."""
    if cls in POLYGON_CLASSES:
        return Outline("polygon", polygon_vertices(cls, box))
    if cls in ELLIPSE_CLASSES:
        return Outline("points", ellipse_sites(box))
    raise NotAShape(f"{cls} has no outline")


@dataclass(frozen=True)
class AnchorPoint:
    """A bindable site on a shape.

    For polygon outlines ``site_index`` is the edge index and ``edge_t`` the
    parametric position of the anchor along that edge; for the ellipse family
    ``site_index`` indexes the eight candidate points and ``edge_t`` is None.
    """

    shape_id: int
    site_index: int
    position: Point
    edge_t: Optional[float] = None


@dataclass(frozen=True)
class Bound:
    """Endpoint bound to a shape anchor; ``distance`` is the keypoint-to-
    anchor snap distance at resolution time."""

    anchor: AnchorPoint
    distance: float


@dataclass(frozen=True)
class Free:
    """Endpoint left unbound at its original position."""

    position: Point


Binding = Union[Bound, Free]


@dataclass
class ConnectorEdge:
    """A resolved connector: kind is arrow (directed), double_arrow, or
    line."""

    id: int
    kind: ElementClass
    from_binding: Binding
    to_binding: Binding
    label: Optional[str] = None


def keypoint_to_shape_distance(
    p: Point, cls: ElementClass, box: CornerBox, shape_id: int = -1
) -> tuple[float, AnchorPoint]:
    """Distance from a keypoint to a shape's outline and the nearest anchor.

    Polygon outlines use true point-to-edge distance (perpendicular foot when
    it falls on the edge, nearer endpoint otherwise); the ellipse family uses
    the nearest of its eight candidate points.  Ties keep the lowest site
    index.
    """
    outline = shape_outline(cls, box)
    if outline.kind == "polygon":
        d, fx, fy, edge_idx, _on, t = kernels.polygon_nearest(p[0], p[1], outline.points)
        return d, AnchorPoint(shape_id, edge_idx, (fx, fy), t)
    d, idx = kernels.nearest_point(p[0], p[1], outline.points)
    return d, AnchorPoint(shape_id, idx, outline.points[idx], None)


def anchor_position(
    cls: ElementClass, box: CornerBox, site_index: int, edge_t: Optional[float]
) -> Point:
    """Recompute an anchor's position from its site identity against a
    (possibly moved or resized) box."""
    outline = shape_outline(cls, box)
    pts = outline.points
    if outline.kind == "polygon":
        if not 0 <= site_index < len(pts):
            raise ValueError(f"edge index {site_index} out of range")
        t = 0.0 if edge_t is None else edge_t
        ax, ay = pts[site_index]
        bx, by = pts[(site_index + 1) % len(pts)]
        return (ax + t * (bx - ax), ay + t * (by - ay))
    if not 0 <= site_index < len(pts):
        raise ValueError(f"site index {site_index} out of range")
    return pts[site_index]


ShapeRef = tuple[int, ElementClass, CornerBox]


def resolve_connections(
    shapes: Sequence[ShapeRef],
    connectors: Sequence[Detection],
    max_bind_distance: Optional[float] = None,
    first_edge_id: Optional[int] = None,
) -> list[ConnectorEdge]:
    """Bind each connector endpoint to the globally nearest shape anchor.

    ``shapes`` are (id, class, box) triples.  An endpoint stays Free when
    there are no shapes or the nearest anchor is farther than
    ``max_bind_distance`` (None means unlimited).  Edge ids are assigned
    sequentially from ``first_edge_id`` (default: one past the highest shape
    id).  Both endpoints of an edge may bind to the same shape (self-loop).
    """
    for sid, cls, _box in shapes:
        if not is_shape(cls):
            raise NotAShape(f"shape list contains non-shape {cls} (id {sid})")
    limit = math.inf if max_bind_distance is None else max_bind_distance
    if first_edge_id is None:
        first_edge_id = max((sid for sid, _c, _b in shapes), default=-1) + 1

    edges: list[ConnectorEdge] = []
    for offset, det in enumerate(connectors):
        if not is_connector(det.cls):
            raise ValueError(f"not a connector: {det.cls}")
        if det.keypoints is None:
            raise ValueError("connector without keypoints")
        bindings: list[Binding] = []
        for p in (det.keypoints.from_xy, det.keypoints.to_xy):
            bindings.append(_bind_endpoint(p, shapes, limit))
        edges.append(
            ConnectorEdge(
                id=first_edge_id + offset,
                kind=det.cls,
                from_binding=bindings[0],
                to_binding=bindings[1],
            )
        )
    return edges


def _bind_endpoint(p: Point, shapes: Sequence[ShapeRef], limit: float) -> Binding:
    best: Optional[tuple[float, int, int, AnchorPoint]] = None
    for sid, cls, box in shapes:
        d, anchor = keypoint_to_shape_distance(p, cls, box, shape_id=sid)
        key = (d, sid, anchor.site_index)
        if best is None or key < (best[0], best[1], best[2]):
            best = (d, sid, anchor.site_index, anchor)
    if best is None or best[0] > limit:
        return Free(position=p)
    return Bound(anchor=best[3], distance=best[0])


def is_self_loop(edge: ConnectorEdge) -> bool:
    """True when both endpoints are bound to the same shape."""
    return (
        isinstance(edge.from_binding, Bound)
        and isinstance(edge.to_binding, Bound)
        and edge.from_binding.anchor.shape_id == edge.to_binding.anchor.shape_id
    )
