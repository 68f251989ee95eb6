"""Text association: merge raw text detections into text blocks, attach them
to shapes or connectors, and optionally run a recognizer over them.

A text detection whose box lies at least 80% inside a shape labels that shape
(best containment wins; ties prefer the smaller shape).  All detections
labelling the same shape merge into one block.  Unattached detections merge
transitively when their boxes overlap with IoU > 0.1; merging repeats until a
fixed point so re-merging the result changes nothing.  Within a block, member
texts read top-to-bottom in bands of the median text height, left-to-right
inside a band.
"""

from __future__ import annotations

import math
import shlex
import statistics
import subprocess
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from flowmind import kernels
from flowmind.geometry import CornerBox, Detection, ElementClass, Point, is_text

CONTAINMENT_THRESHOLD = 0.8
MERGE_IOU = 0.1


@dataclass(frozen=True)
class ShapeLabel:
    shape_id: int


@dataclass(frozen=True)
class ConnectorLabel:
    connector_id: int


@dataclass(frozen=True)
class Standalone:
    pass


Attachment = Union[ShapeLabel, ConnectorLabel, Standalone]


@dataclass
class TextBlock:
    """A merged text region.  ``members`` are indices into the source text
    detection list, in reading order."""

    bbox: CornerBox
    members: tuple[int, ...]
    content: Optional[str] = None
    confidence: Optional[float] = None
    attachment: Attachment = Standalone()


class RecognizerFailure(RuntimeError):
    """Raised for recognizer configuration errors (not per-block failures,
    which are reported, not raised)."""


@dataclass(frozen=True)
class RecognizerSpec:
    """mode is one of 'none', 'ground_truth_echo', 'external_command'.

    external_command is a shell template receiving {image} and the crop box
    {x0} {y0} {x1} {y1}; it must print the recognized text on the first line
    and may print a confidence in [0, 1] on the second.
    """

    mode: str = "none"
    command: Optional[str] = None

    def __post_init__(self) -> None:
        if self.mode not in ("none", "ground_truth_echo", "external_command"):
            raise RecognizerFailure(f"unknown recognizer mode {self.mode!r}")
        if self.mode == "external_command":
            if not self.command:
                raise RecognizerFailure("external_command requires a command template")
            for placeholder in ("{image}", "{x0}", "{y0}", "{x1}", "{y1}"):
                if placeholder not in self.command:
                    raise RecognizerFailure(
                        f"command template missing placeholder {placeholder}"
                    )


def containment_ratio(inner: CornerBox, outer: CornerBox) -> float:
    """Fraction of ``inner``'s area covered by ``outer`` (0.0 when inner is
    degenerate)."""
    if inner.area <= 0.0:
        return 0.0
    iw = min(inner.x1, outer.x1) - max(inner.x0, outer.x0)
    ih = min(inner.y1, outer.y1) - max(inner.y0, outer.y0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return (iw * ih) / inner.area


def union_box(boxes: Sequence[CornerBox]) -> CornerBox:
    if not boxes:
        raise ValueError("empty box list")
    return CornerBox(
        min(b.x0 for b in boxes),
        min(b.y0 for b in boxes),
        max(b.x1 for b in boxes),
        max(b.y1 for b in boxes),
    )


def reading_order(boxes: Sequence[CornerBox]) -> list[int]:
    """Indices sorted top-to-bottom in bands of the median box height,
    left-to-right within a band."""
    n = len(boxes)
    if n == 0:
        return []
    band_h = statistics.median(b.height for b in boxes)
    if band_h <= 0.0:
        band_h = 1.0
    centers = [b.center for b in boxes]
    y_min = min(c[1] for c in centers)
    def key(i: int) -> tuple[int, float, float, int]:
        xc, yc = centers[i]
        return (int((yc - y_min) // band_h), xc, yc, i)
    return sorted(range(n), key=key)


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


_ShapeRef = tuple[int, ElementClass, CornerBox]


def _overlap_score(text_box: CornerBox, shape_box: CornerBox, literal_iou: bool) -> float:
    if literal_iou:
        return kernels.box_iou(*text_box.as_tuple(), *shape_box.as_tuple())
    return containment_ratio(text_box, shape_box)


def _best_shape(
    box: CornerBox,
    shapes: Sequence["_ShapeRef"],
    threshold: float,
    literal_iou: bool,
) -> Optional[int]:
    """Shape id with the highest overlap score >= threshold; ties prefer the
    smaller shape, then the lower id."""
    best: Optional[tuple[float, float, int]] = None  # (-score, area, id)
    for sid, _cls, sbox in shapes:
        score = _overlap_score(box, sbox, literal_iou)
        if score >= threshold:
            key = (-score, sbox.area, sid)
            if best is None or key < best:
                best = key
    return None if best is None else best[2]


def merge_text_boxes(
    texts: Sequence[Detection],
    shapes: Sequence[_ShapeRef] = (),
    containment_threshold: float = CONTAINMENT_THRESHOLD,
    merge_iou: float = MERGE_IOU,
    literal_iou: bool = False,
) -> list[TextBlock]:
    """Merge text detections into blocks.

    Detections contained (>= threshold) in a shape group by their best shape
    and merge into one ShapeLabel block per shape.  The rest merge
    transitively on IoU > ``merge_iou`` over current block boxes, iterated to
    a fixed point, and come out Standalone.  Output order: shape blocks by
    shape id, then standalone blocks in reading order.  ``literal_iou``
    switches the attachment criterion from containment ratio to plain IoU.
    """
    for det in texts:
        if not is_text(det.cls):
            raise ValueError(f"not a text element: {det.cls}")

    by_shape: dict[int, list[int]] = {}
    unassigned: list[int] = []
    for i, det in enumerate(texts):
        sid = _best_shape(det.bbox, shapes, containment_threshold, literal_iou)
        if sid is None:
            unassigned.append(i)
        else:
            by_shape.setdefault(sid, []).append(i)

    blocks: list[TextBlock] = []
    for sid in sorted(by_shape):
        members = by_shape[sid]
        blocks.append(_make_block(texts, members, ShapeLabel(sid)))

    standalone = _merge_standalone(texts, unassigned, merge_iou)
    order = reading_order([b.bbox for b in standalone])
    blocks.extend(standalone[i] for i in order)
    return blocks


def _make_block(
    texts: Sequence[Detection], members: list[int], attachment: Attachment
) -> TextBlock:
    boxes = [texts[i].bbox for i in members]
    order = reading_order(boxes)
    return TextBlock(
        bbox=union_box(boxes),
        members=tuple(members[i] for i in order),
        attachment=attachment,
    )


def _merge_standalone(
    texts: Sequence[Detection], indices: list[int], merge_iou: float
) -> list[TextBlock]:
    groups: list[list[int]] = [[i] for i in indices]
    boxes: list[CornerBox] = [texts[i].bbox for i in indices]
    # Iterate to a fixed point: merged union boxes may newly overlap other
    # blocks, so a single transitive pass is not idempotent.
    changed = True
    while changed and len(groups) > 1:
        changed = False
        uf = _UnionFind(len(groups))
        arr = np.array([b.as_tuple() for b in boxes], dtype=float)
        iou = kernels.pairwise_iou(arr, arr)
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                if iou[a, b] > merge_iou:
                    if uf.union(a, b):
                        changed = True
        if changed:
            merged: dict[int, list[int]] = {}
            for g in range(len(groups)):
                merged.setdefault(uf.find(g), []).extend(groups[g])
            keys = sorted(merged, key=lambda r: min(merged[r]))
            groups = [sorted(merged[k]) for k in keys]
            boxes = [union_box([texts[i].bbox for i in g]) for g in groups]
    return [_make_block(texts, g, Standalone()) for g in groups]


ConnectorRef = tuple[int, CornerBox, Point, Point]


def assign_text(
    blocks: Sequence[TextBlock],
    shapes: Sequence[_ShapeRef] = (),
    connectors: Sequence[ConnectorRef] = (),
    containment_threshold: float = CONTAINMENT_THRESHOLD,
    literal_iou: bool = False,
) -> list[TextBlock]:
    """Attach still-standalone blocks.

    A block >= threshold contained in a shape labels that shape (best
    overlap, ties to the smaller shape).  Otherwise a block >= threshold
    contained in a connector's box labels the connector whose keypoint
    segment midpoint is nearest the block center (ties: lower connector
    id).  Anything else stays standalone.  Existing attachments are
    preserved.  ``literal_iou`` switches the shape criterion from
    containment ratio to plain IoU.
    """
    out: list[TextBlock] = []
    for blk in blocks:
        if not isinstance(blk.attachment, Standalone):
            out.append(blk)
            continue
        attachment: Attachment = Standalone()
        sid = _best_shape(blk.bbox, shapes, containment_threshold, literal_iou)
        if sid is not None:
            attachment = ShapeLabel(sid)
        else:
            cx, cy = blk.bbox.center
            best_conn: Optional[tuple[float, int]] = None
            for cid, cbox, p_from, p_to in connectors:
                if containment_ratio(blk.bbox, cbox) >= containment_threshold:
                    mx = (p_from[0] + p_to[0]) / 2.0
                    my = (p_from[1] + p_to[1]) / 2.0
                    d = math.sqrt((cx - mx) * (cx - mx) + (cy - my) * (cy - my))
                    key2 = (d, cid)
                    if best_conn is None or key2 < best_conn:
                        best_conn = key2
            if best_conn is not None:
                attachment = ConnectorLabel(best_conn[1])
        out.append(
            TextBlock(
                bbox=blk.bbox,
                members=blk.members,
                content=blk.content,
                confidence=blk.confidence,
                attachment=attachment,
            )
        )
    return out


def recognize(
    blocks: Sequence[TextBlock],
    spec: RecognizerSpec,
    texts: Sequence[Detection] = (),
    image_path: Optional[str] = None,
) -> tuple[list[TextBlock], list[tuple[int, str]]]:
    """Fill block content according to the recognizer spec.

    * none: content stays absent.
    * ground_truth_echo: concatenates the member detections' text fields in
      reading order with single spaces; confidence 1.0.
    * external_command: runs the command template per block on the
      inward-rounded integer crop of the block's box.

    Returns the updated blocks and a list of per-block problems
    (block_index, message); a failing block keeps content None.
    """
    out: list[TextBlock] = []
    problems: list[tuple[int, str]] = []
    for bi, blk in enumerate(blocks):
        content: Optional[str] = blk.content
        confidence: Optional[float] = blk.confidence
        if spec.mode == "ground_truth_echo":
            parts = [
                texts[m].text
                for m in blk.members
                if m < len(texts) and texts[m].text is not None
            ]
            if parts:
                content = " ".join(parts)  # type: ignore[arg-type]
                confidence = 1.0
        elif spec.mode == "external_command":
            content, confidence = _run_external(
                bi, blk, spec, image_path, problems
            )
        out.append(
            TextBlock(
                bbox=blk.bbox,
                members=blk.members,
                content=content,
                confidence=confidence,
                attachment=blk.attachment,
            )
        )
    return out, problems


def _run_external(
    bi: int,
    blk: TextBlock,
    spec: RecognizerSpec,
    image_path: Optional[str],
    problems: list[tuple[int, str]],
) -> tuple[Optional[str], Optional[float]]:
    if image_path is None:
        problems.append((bi, "no image path for external recognizer"))
        return None, None
    x0 = math.ceil(blk.bbox.x0)
    y0 = math.ceil(blk.bbox.y0)
    x1 = math.floor(blk.bbox.x1)
    y1 = math.floor(blk.bbox.y1)
    assert spec.command is not None
    cmd = spec.command.format(image=image_path, x0=x0, y0=y0, x1=x1, y1=y1)
    try:
        proc = subprocess.run(
            shlex.split(cmd), capture_output=True, text=True, timeout=60
        )
    except (OSError, subprocess.TimeoutExpired) as exc:
        problems.append((bi, f"recognizer failed to run: {exc}"))
        return None, None
    if proc.returncode != 0:
        problems.append((bi, f"recognizer exited with status {proc.returncode}"))
        return None, None
    lines = proc.stdout.splitlines()
    content = lines[0] if lines else ""
    if content == "":
        problems.append((bi, "empty recognition result"))
    confidence: Optional[float] = None
    if len(lines) > 1:
        try:
            c = float(lines[1].strip())
            if 0.0 <= c <= 1.0:
                confidence = c
            else:
                problems.append((bi, "confidence out of range, ignored"))
        except ValueError:
            problems.append((bi, "unparseable confidence, ignored"))
    return content, confidence
