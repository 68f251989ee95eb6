"""The assembled diagram document: shapes, resolved connectors, and free
text, in page coordinates (inches).

Pixel-space pipeline results are converted here once, at assembly, using the
configured dpi; everything downstream (layout, exporters) works in inches.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from flowmind.connect import (
    AnchorPoint,
    Bound,
    ConnectorEdge,
    Free,
    is_self_loop,
)
from flowmind.geometry import CenterBox, Detection, ElementClass, corner_to_center
from flowmind.ingest import DocumentInput, NonPositiveDpi
from flowmind.text import ConnectorLabel, ShapeLabel, Standalone, TextBlock


@dataclass
class ShapeNode:
    """A diagram shape; ``box`` is center-form in inches."""

    id: int
    cls: ElementClass
    box: CenterBox
    label: Optional[str] = None


@dataclass
class DiagramDoc:
    """An editable diagram: page size in inches, shapes, connectors, and
    standalone text."""

    page_width: float
    page_height: float
    dpi: float
    shapes: list[ShapeNode] = field(default_factory=list)
    connectors: list[ConnectorEdge] = field(default_factory=list)
    free_texts: list[TextBlock] = field(default_factory=list)


def validate_document(doc: DiagramDoc) -> None:
    """Raise ValueError on structural problems: duplicate ids, bindings to
    missing shapes, shape centers off the page, or a non-positive dpi."""
    problems: list[str] = []
    if doc.dpi <= 0:
        raise NonPositiveDpi(f"dpi must be > 0, got {doc.dpi}")
    seen: set[int] = set()
    shape_ids: set[int] = set()
    for node in doc.shapes:
        if node.id in seen:
            problems.append(f"duplicate id {node.id}")
        seen.add(node.id)
        shape_ids.add(node.id)
        if not (0.0 <= node.box.xc <= doc.page_width and 0.0 <= node.box.yc <= doc.page_height):
            problems.append(f"shape {node.id} center off page")
    for edge in doc.connectors:
        if edge.id in seen:
            problems.append(f"duplicate id {edge.id}")
        seen.add(edge.id)
        for name, binding in (("from", edge.from_binding), ("to", edge.to_binding)):
            if isinstance(binding, Bound) and binding.anchor.shape_id not in shape_ids:
                problems.append(
                    f"connector {edge.id} {name} endpoint bound to missing shape "
                    f"{binding.anchor.shape_id}"
                )
    if problems:
        raise ValueError("; ".join(problems))


def _scale_binding(binding, factor: float):
    if isinstance(binding, Bound):
        a = binding.anchor
        return Bound(
            anchor=AnchorPoint(
                shape_id=a.shape_id,
                site_index=a.site_index,
                position=(a.position[0] * factor, a.position[1] * factor),
                edge_t=a.edge_t,
            ),
            distance=binding.distance * factor,
        )
    return Free(position=(binding.position[0] * factor, binding.position[1] * factor))


def assemble_document(
    parsed: DocumentInput,
    shape_dets: Sequence[tuple[int, Detection]],
    edges: Sequence[ConnectorEdge],
    blocks: Sequence[TextBlock],
    dpi: float,
) -> DiagramDoc:
    """Convert pixel-space pipeline results into an inch-space document.

    Text blocks attached to a shape become the shape's label, blocks attached
    to a connector become the edge's label (multiple contributions join with
    single spaces in block order), standalone blocks become free text.
    """
    if dpi <= 0:
        raise NonPositiveDpi(f"dpi must be > 0, got {dpi}")
    inv = 1.0 / dpi

    shape_labels: dict[int, list[str]] = {}
    edge_labels: dict[int, list[str]] = {}
    free: list[TextBlock] = []
    for blk in blocks:
        if isinstance(blk.attachment, ShapeLabel) and blk.content is not None:
            shape_labels.setdefault(blk.attachment.shape_id, []).append(blk.content)
        elif isinstance(blk.attachment, ConnectorLabel) and blk.content is not None:
            edge_labels.setdefault(blk.attachment.connector_id, []).append(blk.content)
        elif isinstance(blk.attachment, Standalone):
            free.append(
                TextBlock(
                    bbox=blk.bbox.scaled(inv),
                    members=blk.members,
                    content=blk.content,
                    confidence=blk.confidence,
                    attachment=Standalone(),
                )
            )

    shapes = []
    for sid, det in shape_dets:
        center_px = corner_to_center(det.bbox)
        label_parts = shape_labels.get(sid)
        shapes.append(
            ShapeNode(
                id=sid,
                cls=det.cls,
                box=CenterBox(
                    center_px.xc * inv,
                    center_px.yc * inv,
                    center_px.width * inv,
                    center_px.height * inv,
                ),
                label=" ".join(label_parts) if label_parts else None,
            )
        )

    connectors = []
    for edge in edges:
        label_parts = edge_labels.get(edge.id)
        connectors.append(
            ConnectorEdge(
                id=edge.id,
                kind=edge.kind,
                from_binding=_scale_binding(edge.from_binding, inv),
                to_binding=_scale_binding(edge.to_binding, inv),
                label=" ".join(label_parts) if label_parts else edge.label,
            )
        )

    return DiagramDoc(
        page_width=parsed.image_width * inv,
        page_height=parsed.image_height * inv,
        dpi=dpi,
        shapes=shapes,
        connectors=connectors,
        free_texts=free,
    )


def document_summary(doc: DiagramDoc) -> dict:
    """Counts and flags used in conversion reports."""
    return {
        "shapes": len(doc.shapes),
        "connectors": len(doc.connectors),
        "free_texts": len(doc.free_texts),
        "self_loops": sum(1 for e in doc.connectors if is_self_loop(e)),
        "free_endpoints": sum(
            isinstance(b, Free)
            for e in doc.connectors
            for b in (e.from_binding, e.to_binding)
        ),
    }


def copy_document(doc: DiagramDoc) -> DiagramDoc:
    """Deep-enough copy: shapes and connectors are fresh objects so layout
    can rewrite them without touching the input."""
    return DiagramDoc(
        page_width=doc.page_width,
        page_height=doc.page_height,
        dpi=doc.dpi,
        shapes=[replace(s) for s in doc.shapes],
        connectors=[replace(e) for e in doc.connectors],
        free_texts=[replace(t) for t in doc.free_texts],
    )
