"""SVG preview export.

One graphical element per shape (class ``shape <cls>``), connector
(``connector <kind>``), and free text (``free-text``), drawn in pixels at the
document dpi.  Shapes use the same standardized outlines the connection
resolver snaps to, so bound connector endpoints land exactly on the drawn
outline.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from flowmind.connect import Bound, Free, polygon_vertices, POLYGON_CLASSES
from flowmind.document import DiagramDoc
from flowmind.export import CONNECTOR_COLOR, PALETTE, TEXT_COLOR, label_font_size_pt
from flowmind.geometry import ElementClass, Point, center_to_corner


def _f(v: float) -> str:
    s = f"{v:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _binding_point(binding) -> Point:
    if isinstance(binding, Bound):
        return binding.anchor.position
    assert isinstance(binding, Free)
    return binding.position


_DEFS = (
    '  <defs>\n'
    '    <marker id="arrow-end" markerWidth="10" markerHeight="8" refX="9" refY="4"'
    ' orient="auto" markerUnits="userSpaceOnUse">\n'
    '      <path d="M0,0 L9,4 L0,8 z" fill="#000000"/>\n'
    '    </marker>\n'
    '    <marker id="arrow-start" markerWidth="10" markerHeight="8" refX="0" refY="4"'
    ' orient="auto" markerUnits="userSpaceOnUse">\n'
    '      <path d="M9,0 L0,4 L9,8 z" fill="#000000"/>\n'
    '    </marker>\n'
    '  </defs>\n'
)


def export_svg(doc: DiagramDoc) -> bytes:
    """Serialize the document as a standalone SVG image."""
    dpi = doc.dpi
    w_px = doc.page_width * dpi
    h_px = doc.page_height * dpi
    parts: list[str] = []
    parts.append('<?xml version="1.0" encoding="UTF-8"?>\n')
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(w_px)}" height="{_f(h_px)}"'
        f' viewBox="0 0 {_f(w_px)} {_f(h_px)}">\n'
    )
    parts.append(_DEFS)
    parts.append(
        f'  <rect class="page" x="0" y="0" width="{_f(w_px)}" height="{_f(h_px)}"'
        ' fill="#ffffff" stroke="#c0c0c0"/>\n'
    )

    parts.append('  <g class="shapes">\n')
    for node in doc.shapes:
        box = center_to_corner(node.box).scaled(dpi)
        fill, stroke = PALETTE[node.cls]
        style = f'fill="#{fill}" stroke="#{stroke}" stroke-width="2"'
        cls_attr = f'class="shape {node.cls.value}"'
        if node.cls in POLYGON_CLASSES:
            pts = " ".join(
                f"{_f(x)},{_f(y)}" for x, y in polygon_vertices(node.cls, box)
            )
            parts.append(f'    <polygon {cls_attr} points="{pts}" {style}/>\n')
        elif node.cls is ElementClass.CIRCLE:
            cx, cy = box.center
            parts.append(
                f'    <ellipse {cls_attr} cx="{_f(cx)}" cy="{_f(cy)}"'
                f' rx="{_f(box.width / 2)}" ry="{_f(box.height / 2)}" {style}/>\n'
            )
        else:  # long_oval: stadium
            r = min(box.width, box.height) / 2
            parts.append(
                f'    <rect {cls_attr} x="{_f(box.x0)}" y="{_f(box.y0)}"'
                f' width="{_f(box.width)}" height="{_f(box.height)}"'
                f' rx="{_f(r)}" ry="{_f(r)}" {style}/>\n'
            )
        if node.label is not None:
            cx, cy = box.center
            size = label_font_size_pt(node.box.height)
            parts.append(
                f'    <text class="label" x="{_f(cx)}" y="{_f(cy)}" text-anchor="middle"'
                f' dominant-baseline="central" font-size="{_f(size)}"'
                f' fill="#{TEXT_COLOR}">{escape(node.label)}</text>\n'
            )
    parts.append("  </g>\n")

    parts.append('  <g class="connectors">\n')
    for edge in doc.connectors:
        p1 = _binding_point(edge.from_binding)
        p2 = _binding_point(edge.to_binding)
        x1, y1 = p1[0] * dpi, p1[1] * dpi
        x2, y2 = p2[0] * dpi, p2[1] * dpi
        markers = ""
        if edge.kind is ElementClass.ARROW:
            markers = ' marker-end="url(#arrow-end)"'
        elif edge.kind is ElementClass.DOUBLE_ARROW:
            markers = ' marker-start="url(#arrow-start)" marker-end="url(#arrow-end)"'
        parts.append(
            f'    <line class="connector {edge.kind.value}" x1="{_f(x1)}" y1="{_f(y1)}"'
            f' x2="{_f(x2)}" y2="{_f(y2)}" stroke="#{CONNECTOR_COLOR}"'
            f' stroke-width="2"{markers}/>\n'
        )
        if edge.label is not None:
            mx, my = (x1 + x2) / 2, (y1 + y2) / 2
            parts.append(
                f'    <text class="label" x="{_f(mx)}" y="{_f(my)}" text-anchor="middle"'
                f' font-size="12" fill="#{TEXT_COLOR}">{escape(edge.label)}</text>\n'
            )
    parts.append("  </g>\n")

    parts.append('  <g class="free-texts">\n')
    for blk in doc.free_texts:
        box = blk.bbox.scaled(dpi)
        cx, cy = box.center
        size = label_font_size_pt(blk.bbox.height)
        content = escape(blk.content) if blk.content is not None else ""
        parts.append(
            f'    <text class="free-text" x="{_f(cx)}" y="{_f(cy)}" text-anchor="middle"'
            f' dominant-baseline="central" font-size="{_f(size)}"'
            f' fill="#{TEXT_COLOR}">{content}</text>\n'
        )
    parts.append("  </g>\n")
    parts.append("</svg>\n")
    return "".join(parts).encode("utf-8")


__all__ = ["export_svg"]
