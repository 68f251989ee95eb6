"""End-to-end conversion of parsed detections into an editable diagram.

Stage order: cross-class suppression, connection resolution, text merging
and recognition, attachment, document assembly (pixels to inches), then the
optional two-stage auto-layout.  Every stage can be disabled through the
config; the report echoes the effective configuration and per-stage counts
so batch runs are auditable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from flowmind.connect import ConnectorEdge, Free, resolve_connections
from flowmind.document import (
    DiagramDoc,
    assemble_document,
    document_summary,
)
from flowmind.geometry import Detection, is_connector, is_shape, is_text
from flowmind.ingest import DocumentInput, NonPositiveDpi
from flowmind.layout import LayoutConfig, LayoutReport, autotypeset
from flowmind.nms import NmsConfig, cross_class_nms
from flowmind.text import (
    RecognizerSpec,
    assign_text,
    merge_text_boxes,
    recognize,
)


@dataclass(frozen=True)
class PipelineConfig:
    """Effective settings for one conversion.

    ``nms=None`` skips suppression entirely; ``layout.enabled=False`` skips
    auto-layout; ``max_bind_distance=None`` lets endpoints bind to anchors at
    any distance.
    """

    dpi: float = 96.0
    nms: Optional[NmsConfig] = NmsConfig()
    layout: LayoutConfig = LayoutConfig()
    recognizer: RecognizerSpec = RecognizerSpec(mode="ground_truth_echo")
    text_literal_iou: bool = False
    max_bind_distance: Optional[float] = None

    def __post_init__(self) -> None:
        if self.dpi <= 0:
            raise NonPositiveDpi(f"dpi must be > 0, got {self.dpi}")
        if self.max_bind_distance is not None and self.max_bind_distance < 0:
            raise ValueError("max_bind_distance must be >= 0 or None")

    def to_dict(self) -> dict:
        return {
            "dpi": self.dpi,
            "nms": (
                None
                if self.nms is None
                else {
                    "iou_threshold": self.nms.iou_threshold,
                    "exempt_text": self.nms.exempt_text,
                }
            ),
            "layout": {
                "enabled": self.layout.enabled,
                "dpi": self.layout.dpi,
                "stage1_t1": self.layout.stage1_t1,
                "stage2_t1": self.layout.stage2_t1,
                "t2_divisor": self.layout.t2_divisor,
                "kmeans_max_iters": self.layout.kmeans_max_iters,
                "kmeans_tol": self.layout.kmeans_tol,
            },
            "recognizer": {
                "mode": self.recognizer.mode,
                "command": self.recognizer.command,
            },
            "text_literal_iou": self.text_literal_iou,
            "max_bind_distance": self.max_bind_distance,
        }


@dataclass
class ConversionReport:
    config: dict
    input_elements: int = 0
    suppressed: int = 0
    shapes: int = 0
    connectors: int = 0
    text_blocks: int = 0
    free_texts: int = 0
    self_loops: int = 0
    free_endpoints: int = 0
    recognizer_problems: list[tuple[int, str]] = field(default_factory=list)
    layout: Optional[LayoutReport] = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "input_elements": self.input_elements,
            "suppressed": self.suppressed,
            "shapes": self.shapes,
            "connectors": self.connectors,
            "text_blocks": self.text_blocks,
            "free_texts": self.free_texts,
            "self_loops": self.self_loops,
            "free_endpoints": self.free_endpoints,
            "recognizer_problems": [
                {"block": bi, "message": msg} for bi, msg in self.recognizer_problems
            ],
            "layout": None if self.layout is None else _layout_dict(self.layout),
            "warnings": list(self.warnings),
        }


def _layout_dict(report: LayoutReport) -> dict:
    def stage(s) -> Optional[dict]:
        if s is None:
            return None
        return {
            "t1": s.t1,
            "t2": s.t2,
            "k": s.k,
            "iterations": s.iterations,
            "objective_history": list(s.objective_history),
        }

    return {
        "enabled": report.enabled,
        "resize": stage(report.resize),
        "align_x": stage(report.align_x),
        "align_y": stage(report.align_y),
    }


def convert_document(
    parsed: DocumentInput, config: PipelineConfig = PipelineConfig()
) -> tuple[DiagramDoc, ConversionReport]:
    """Run the full pipeline on an already-parsed detection document."""
    report = ConversionReport(config=config.to_dict())
    report.input_elements = len(parsed.elements)

    if config.nms is not None:
        survivors = cross_class_nms(parsed.elements, config.nms)
        report.suppressed = len(parsed.elements) - len(survivors)
    else:
        survivors = list(parsed.elements)

    shape_dets: list[tuple[int, Detection]] = []
    connector_dets: list[Detection] = []
    text_dets: list[Detection] = []
    for det in survivors:
        if is_shape(det.cls):
            shape_dets.append((len(shape_dets), det))
        elif is_connector(det.cls):
            connector_dets.append(det)
        elif is_text(det.cls):
            text_dets.append(det)

    shape_refs = [(sid, det.cls, det.bbox) for sid, det in shape_dets]
    edges: list[ConnectorEdge] = resolve_connections(
        shape_refs, connector_dets, max_bind_distance=config.max_bind_distance
    )

    blocks = merge_text_boxes(
        text_dets, shape_refs, literal_iou=config.text_literal_iou
    )
    blocks, problems = recognize(
        blocks, config.recognizer, text_dets, parsed.image_path
    )
    report.recognizer_problems = problems
    connector_refs = [
        (edge.id, det.bbox, det.keypoints.from_xy, det.keypoints.to_xy)
        for edge, det in zip(edges, connector_dets)
        if det.keypoints is not None
    ]
    blocks = assign_text(
        blocks, shape_refs, connector_refs, literal_iou=config.text_literal_iou
    )
    report.text_blocks = len(blocks)

    doc = assemble_document(parsed, shape_dets, edges, blocks, config.dpi)
    doc, layout_report = autotypeset(doc, config.layout)
    report.layout = layout_report

    summary = document_summary(doc)
    report.shapes = summary["shapes"]
    report.connectors = summary["connectors"]
    report.free_texts = summary["free_texts"]
    report.self_loops = summary["self_loops"]
    report.free_endpoints = summary["free_endpoints"]
    for eid in sorted(
        e.id for e in doc.connectors if _has_free_endpoint(e)
    ):
        report.warnings.append(f"connector {eid} has a free endpoint")
    return doc, report


def _has_free_endpoint(edge: ConnectorEdge) -> bool:
    return isinstance(edge.from_binding, Free) or isinstance(edge.to_binding, Free)
