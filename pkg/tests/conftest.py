"""Shared test helpers."""

from __future__ import annotations

from typing import Optional

from flowmind.geometry import CornerBox, Detection, ElementClass, KeypointPair


def box(x0: float, y0: float, x1: float, y1: float) -> CornerBox:
    return CornerBox(x0, y0, x1, y1)


def det(
    cls: ElementClass,
    bbox: CornerBox,
    score: float = 1.0,
    keypoints: Optional[KeypointPair] = None,
    text: Optional[str] = None,
) -> Detection:
    return Detection(cls=cls, bbox=bbox, score=score, keypoints=keypoints, text=text)


def doc_dict(width: int = 640, height: int = 480, elements: Optional[list] = None) -> dict:
    return {
        "image": {"width": width, "height": height},
        "elements": elements or [],
    }
