"""Exporters for the assembled diagram document.

All exporters are deterministic byte-for-byte for a fixed document.  Shared
styling lives here: one fill/stroke pair per shape class (consistent colors
per class) and the label font-size rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from flowmind.document import DiagramDoc, document_summary
from flowmind.geometry import ElementClass

# Class-consistent fill/stroke colors (hex without '#').
PALETTE: dict[ElementClass, tuple[str, str]] = {
    ElementClass.RECTANGLE: ("dae8fc", "6c8ebf"),
    ElementClass.CIRCLE: ("d5e8d4", "82b366"),
    ElementClass.DIAMOND: ("fff2cc", "d6b656"),
    ElementClass.HEXAGON: ("e1d5e7", "9673a6"),
    ElementClass.PARALLELOGRAM: ("ffe6cc", "d79b00"),
    ElementClass.TRAPEZOID: ("f8cecc", "b85450"),
    ElementClass.TRIANGLE: ("d4e1f5", "5c79af"),
    ElementClass.LONG_OVAL: ("e8f7e4", "67ab5f"),
}

TEXT_COLOR = "000000"
CONNECTOR_COLOR = "000000"

FONT_MIN_PT = 8.0
FONT_MAX_PT = 40.0


def label_font_size_pt(shape_height_in: float) -> float:
    """Label font size: half the shape height, in points, clamped to
    [8, 40] pt."""
    return min(max(shape_height_in * 72.0 * 0.5, FONT_MIN_PT), FONT_MAX_PT)


@dataclass
class ExportReport:
    """Emitted element counts (equal to document counts) plus warnings for
    constructs that degrade in some formats."""

    shape_count: int = 0
    connector_count: int = 0
    free_text_count: int = 0
    self_loop_count: int = 0
    free_endpoint_count: int = 0
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def from_doc(cls, doc: DiagramDoc) -> "ExportReport":
        summary = document_summary(doc)
        report = cls(
            shape_count=summary["shapes"],
            connector_count=summary["connectors"],
            free_text_count=summary["free_texts"],
            self_loop_count=summary["self_loops"],
            free_endpoint_count=summary["free_endpoints"],
        )
        from flowmind.connect import Free, is_self_loop

        for edge in doc.connectors:
            if isinstance(edge.from_binding, Free) or isinstance(edge.to_binding, Free):
                report.warnings.append(f"connector {edge.id} has a free endpoint")
            if is_self_loop(edge):
                report.warnings.append(f"connector {edge.id} is a self-loop")
        return report


from flowmind.export.drawio import export_drawio  # noqa: E402
from flowmind.export.pptx import PackageWriteError, export_pptx  # noqa: E402
from flowmind.export.svg import export_svg  # noqa: E402

__all__ = [
    "PALETTE",
    "ExportReport",
    "PackageWriteError",
    "export_drawio",
    "export_pptx",
    "export_svg",
    "label_font_size_pt",
]
