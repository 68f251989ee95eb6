"""Core value types: element classes, box forms, detections, and the
corner/center box conversion used everywhere else.

Coordinates are x-right, y-down.  Boxes are axis-aligned; the corner form
stores (x0, y0, x1, y1) with x0 <= x1 and y0 <= y1, the center form stores
(xc, yc, width, height) with non-negative sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from flowmind import kernels

Point = tuple[float, float]


class ElementClass(Enum):
    """The twelve element classes a detector can emit."""

    CIRCLE = "circle"
    DIAMOND = "diamond"
    HEXAGON = "hexagon"
    LONG_OVAL = "long_oval"
    PARALLELOGRAM = "parallelogram"
    RECTANGLE = "rectangle"
    TRAPEZOID = "trapezoid"
    TRIANGLE = "triangle"
    TEXTBLOCK = "textblock"
    ARROW = "arrow"
    DOUBLE_ARROW = "double_arrow"
    LINE = "line"


SHAPE_CLASSES = frozenset(
    {
        ElementClass.CIRCLE,
        ElementClass.DIAMOND,
        ElementClass.HEXAGON,
        ElementClass.LONG_OVAL,
        ElementClass.PARALLELOGRAM,
        ElementClass.RECTANGLE,
        ElementClass.TRAPEZOID,
        ElementClass.TRIANGLE,
    }
)

CONNECTOR_CLASSES = frozenset(
    {ElementClass.ARROW, ElementClass.DOUBLE_ARROW, ElementClass.LINE}
)


def is_shape(cls: ElementClass) -> bool:
    return cls in SHAPE_CLASSES


def is_connector(cls: ElementClass) -> bool:
    return cls in CONNECTOR_CLASSES


def is_text(cls: ElementClass) -> bool:
    return cls is ElementClass.TEXTBLOCK


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class CornerBox:
    """Axis-aligned box in corner form; x0 <= x1 and y0 <= y1, all finite."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        _require_finite("CornerBox coordinate", self.x0, self.y0, self.x1, self.y1)
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError(
                f"corners out of order: ({self.x0}, {self.y0}, {self.x1}, {self.y1})"
            )

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def center(self) -> Point:
        return (abs(self.x0 + self.x1) / 2.0, abs(self.y0 + self.y1) / 2.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)

    def contains_point(self, p: Point) -> bool:
        return self.x0 <= p[0] <= self.x1 and self.y0 <= p[1] <= self.y1

    def scaled(self, factor: float) -> "CornerBox":
        return CornerBox(
            self.x0 * factor, self.y0 * factor, self.x1 * factor, self.y1 * factor
        )


@dataclass(frozen=True)
class CenterBox:
    """Axis-aligned box in center form; width and height non-negative."""

    xc: float
    yc: float
    width: float
    height: float

    def __post_init__(self) -> None:
        _require_finite(
            "CenterBox coordinate", self.xc, self.yc, self.width, self.height
        )
        if self.width < 0 or self.height < 0:
            raise ValueError(f"negative size: {self.width} x {self.height}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.xc, self.yc, self.width, self.height)


def corner_to_center(box: CornerBox) -> CenterBox:
    """Corner form -> center form: xc=|x0+x1|/2, yc=|y0+y1|/2, w=|x0-x1|,
    h=|y0-y1|."""
    return CenterBox(
        abs(box.x0 + box.x1) / 2.0,
        abs(box.y0 + box.y1) / 2.0,
        abs(box.x0 - box.x1),
        abs(box.y0 - box.y1),
    )


def center_to_corner(box: CenterBox) -> CornerBox:
    """Center form -> corner form: x0=xc-w/2, y0=yc-h/2, x1=xc+w/2,
    y1=yc+h/2."""
    hw = box.width / 2.0
    hh = box.height / 2.0
    return CornerBox(box.xc - hw, box.yc - hh, box.xc + hw, box.yc + hh)


def iou(a: CornerBox, b: CornerBox) -> float:
    """Intersection-over-union; 0.0 for disjoint boxes or a zero-area union."""
    return kernels.box_iou(a.x0, a.y0, a.x1, a.y1, b.x0, b.y0, b.x1, b.y1)


def point_segment_distance(p: Point, a: Point, b: Point) -> tuple[float, bool]:
    """Distance from ``p`` to segment ``a``-``b`` and whether the perpendicular
    foot lies on the segment.  A degenerate segment gives (|p - a|, False)."""
    d, _fx, _fy, on, _t = kernels.point_segment(p[0], p[1], a[0], a[1], b[0], b[1])
    return d, on


@dataclass(frozen=True)
class KeypointPair:
    """Ordered connector endpoints: ``from`` is the tail, ``to`` the head."""

    from_xy: Point
    to_xy: Point

    def __post_init__(self) -> None:
        _require_finite("keypoint", *self.from_xy, *self.to_xy)

    def as_lists(self) -> list[list[float]]:
        return [list(self.from_xy), list(self.to_xy)]


@dataclass(frozen=True)
class Detection:
    """One detector output (or ground-truth element) in pixel space."""

    cls: ElementClass
    bbox: CornerBox
    score: float = 1.0
    keypoints: Optional[KeypointPair] = None
    text: Optional[str] = None

    def __post_init__(self) -> None:
        _require_finite("score", self.score)
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score out of range [0, 1]: {self.score}")
