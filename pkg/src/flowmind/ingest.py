"""Wire-format ingestion: parse detection/ground-truth JSON documents into
validated, normalized element lists.

The wire format is a JSON object::

    {
      "image": {"width": 1280, "height": 720, "path": "optional/source.png"},
      "elements": [
        {"class": "rectangle", "score": 0.97, "bbox": [x0, y0, x1, y1]},
        {"class": "arrow", "score": 0.88, "bbox": [...],
         "keypoints": [[xf, yf], [xt, yt]]},
        {"class": "textblock", "score": 0.91, "bbox": [...], "text": "Start"}
      ]
    }

Document-level problems raise :class:`MalformedDocument`; element-level
problems reject (or warn about) individual elements and are reported in the
:class:`IngestReport`.  Coordinates are clamped into the image; swapped box
corners are normalized.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from flowmind.geometry import (
    CornerBox,
    Detection,
    ElementClass,
    KeypointPair,
    is_connector,
)


class MalformedDocument(ValueError):
    """The document as a whole cannot be parsed (bad JSON, missing image
    metadata, elements not a list, ...)."""


class NonPositiveDpi(ValueError):
    """A dpi value must be strictly positive."""


def pixels_to_inches(value: float, dpi: float) -> float:
    if dpi <= 0:
        raise NonPositiveDpi(f"dpi must be > 0, got {dpi}")
    return value / dpi


def inches_to_pixels(value: float, dpi: float) -> float:
    if dpi <= 0:
        raise NonPositiveDpi(f"dpi must be > 0, got {dpi}")
    return value * dpi


@dataclass(frozen=True)
class DocumentInput:
    """A parsed, validated detection (or ground-truth) document."""

    image_width: int
    image_height: int
    image_path: Optional[str]
    elements: tuple[Detection, ...]


@dataclass
class IngestReport:
    """What happened during parsing.

    ``accepted_count + len(rejected)`` always equals the number of elements in
    the input.  ``clamped_count`` counts elements (not coordinates) whose bbox
    or keypoints were clamped into the image.  ``warnings`` are non-fatal
    element-level notes as (element_index, message).
    """

    accepted_count: int = 0
    clamped_count: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)
    warnings: list[tuple[int, str]] = field(default_factory=list)


_CLASS_BY_NAME = {cls.value: cls for cls in ElementClass}


def normalize_class_name(raw: str) -> Optional[ElementClass]:
    """Case-insensitive class lookup treating '-', '_' and whitespace runs as
    equivalent separators.  Returns None for unknown names."""
    name = re.sub(r"[\s\-_]+", "_", raw.strip().lower())
    return _CLASS_BY_NAME.get(name)


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _as_int_dimension(v: Any) -> Optional[int]:
    if isinstance(v, bool):
        return None
    if isinstance(v, int):
        return v
    if isinstance(v, float) and v.is_integer():
        return int(v)
    return None


def _clamp(v: float, lo: float, hi: float) -> float:
    return min(max(v, lo), hi)


def parse_detections(data: Union[str, bytes]) -> tuple[DocumentInput, IngestReport]:
    """Parse a detector-output document; every element must carry a score in
    [0, 1]."""
    return _parse(data, ground_truth=False)


def parse_ground_truth(data: Union[str, bytes]) -> tuple[DocumentInput, IngestReport]:
    """Parse a ground-truth document; scores are ignored (with a warning) and
    forced to 1.0."""
    return _parse(data, ground_truth=True)


def _parse(data: Union[str, bytes], ground_truth: bool) -> tuple[DocumentInput, IngestReport]:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedDocument(f"not valid UTF-8: {exc}") from exc
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from exc

    if not isinstance(payload, dict):
        raise MalformedDocument("top level must be a JSON object")
    image = payload.get("image")
    if not isinstance(image, dict):
        raise MalformedDocument("missing or invalid 'image' object")
    width = _as_int_dimension(image.get("width"))
    height = _as_int_dimension(image.get("height"))
    if width is None or width <= 0 or height is None or height <= 0:
        raise MalformedDocument("image width/height must be positive integers")
    path = image.get("path")
    if path is not None and not isinstance(path, str):
        raise MalformedDocument("image path must be a string when present")
    raw_elements = payload.get("elements")
    if not isinstance(raw_elements, list):
        raise MalformedDocument("missing or invalid 'elements' list")

    report = IngestReport()
    elements: list[Detection] = []
    for idx, raw in enumerate(raw_elements):
        det = _parse_element(idx, raw, width, height, ground_truth, report)
        if det is not None:
            elements.append(det)
    report.accepted_count = len(elements)
    doc = DocumentInput(width, height, path, tuple(elements))
    return doc, report


def _parse_element(
    idx: int,
    raw: Any,
    width: int,
    height: int,
    ground_truth: bool,
    report: IngestReport,
) -> Optional[Detection]:
    def reject(reason: str) -> None:
        report.rejected.append((idx, reason))

    if not isinstance(raw, dict):
        reject("element is not an object")
        return None

    raw_cls = raw.get("class")
    if not isinstance(raw_cls, str):
        reject("missing class")
        return None
    cls = normalize_class_name(raw_cls)
    if cls is None:
        reject(f"unknown class {raw_cls!r}")
        return None

    bbox = raw.get("bbox")
    if not (isinstance(bbox, list) and len(bbox) == 4 and all(_is_number(v) for v in bbox)):
        reject("malformed bbox")
        return None
    x0, y0, x1, y1 = (float(v) for v in bbox)
    if x0 > x1:
        x0, x1 = x1, x0
    if y0 > y1:
        y0, y1 = y1, y0

    clamped = False
    cx0 = _clamp(x0, 0.0, float(width))
    cy0 = _clamp(y0, 0.0, float(height))
    cx1 = _clamp(x1, 0.0, float(width))
    cy1 = _clamp(y1, 0.0, float(height))
    if (cx0, cy0, cx1, cy1) != (x0, y0, x1, y1):
        clamped = True
    box = CornerBox(cx0, cy0, cx1, cy1)

    if not is_connector(cls) and box.area <= 0.0:
        reject("zero-area bbox")
        return None

    score = 1.0
    if ground_truth:
        if "score" in raw:
            report.warnings.append((idx, "score ignored in ground truth"))
    else:
        raw_score = raw.get("score")
        if raw_score is None:
            reject("missing score")
            return None
        if not _is_number(raw_score) or not 0.0 <= float(raw_score) <= 1.0:
            reject("score out of range [0, 1]")
            return None
        score = float(raw_score)

    raw_kp = raw.get("keypoints")
    keypoints: Optional[KeypointPair] = None
    if is_connector(cls):
        if raw_kp is None:
            reject("connector missing keypoints")
            return None
        pts = _parse_keypoints(raw_kp)
        if pts is None:
            reject("malformed keypoints")
            return None
        clamped_pts = []
        for px, py in pts:
            cpx = _clamp(px, 0.0, float(width))
            cpy = _clamp(py, 0.0, float(height))
            if (cpx, cpy) != (px, py):
                clamped = True
            clamped_pts.append((cpx, cpy))
        keypoints = KeypointPair(clamped_pts[0], clamped_pts[1])
        for p in clamped_pts:
            if not box.contains_point(p):
                report.warnings.append((idx, "keypoint outside connector bbox"))
                break
    elif raw_kp is not None:
        report.warnings.append((idx, "keypoints dropped for non-connector element"))

    text = raw.get("text")
    if text is not None and not isinstance(text, str):
        reject("text is not a string")
        return None

    if clamped:
        report.clamped_count += 1

    return Detection(cls=cls, bbox=box, score=score, keypoints=keypoints, text=text)


def _parse_keypoints(raw: Any) -> Optional[list[tuple[float, float]]]:
    if not (isinstance(raw, list) and len(raw) == 2):
        return None
    pts = []
    for item in raw:
        if not (isinstance(item, list) and len(item) == 2 and all(_is_number(v) for v in item)):
            return None
        pts.append((float(item[0]), float(item[1])))
    return pts


def serialize_document(doc: DocumentInput, include_scores: bool = True) -> str:
    """Canonical serialization: fixed key order, two-space indent, UTF-8 text.

    ``parse(serialize(doc))`` reproduces ``doc`` exactly; byte-identical for
    equal documents.
    """
    image: dict[str, Any] = {"width": doc.image_width, "height": doc.image_height}
    if doc.image_path is not None:
        image["path"] = doc.image_path
    elements = []
    for det in doc.elements:
        entry: dict[str, Any] = {"class": det.cls.value}
        if include_scores:
            entry["score"] = det.score
        entry["bbox"] = list(det.bbox.as_tuple())
        if det.keypoints is not None:
            entry["keypoints"] = det.keypoints.as_lists()
        if det.text is not None:
            entry["text"] = det.text
        elements.append(entry)
    return json.dumps({"image": image, "elements": elements}, ensure_ascii=False, indent=2) + "\n"


def read_document(path: str, ground_truth: bool = False) -> tuple[DocumentInput, IngestReport]:
    """Read and parse a wire-format file from disk."""
    with open(path, "rb") as fh:
        data = fh.read()
    return _parse(data, ground_truth=ground_truth)
