"""draw.io (mxGraphModel) XML export.

Each shape becomes a vertex cell, each connector an edge cell, each free text
a text vertex; geometry is in pixels at the document dpi.  Edge endpoints
bound to a shape reference that shape's cell id; free endpoints are emitted
as explicit fixed points.  Cell count is always |shapes| + |connectors| +
|free_texts| + 2 (the root cell pair).
"""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

from flowmind.connect import Bound, Free
from flowmind.document import DiagramDoc
from flowmind.export import PALETTE, label_font_size_pt
from flowmind.geometry import ElementClass, center_to_corner

_VERTEX_STYLES: dict[ElementClass, str] = {
    ElementClass.RECTANGLE: "rounded=0;whiteSpace=wrap;html=1;",
    ElementClass.LONG_OVAL: "rounded=1;arcSize=50;whiteSpace=wrap;html=1;",
    ElementClass.CIRCLE: "ellipse;whiteSpace=wrap;html=1;",
    ElementClass.DIAMOND: "rhombus;whiteSpace=wrap;html=1;",
    ElementClass.HEXAGON: "shape=hexagon;perimeter=hexagonPerimeter2;whiteSpace=wrap;html=1;",
    ElementClass.PARALLELOGRAM: "shape=parallelogram;perimeter=parallelogramPerimeter;whiteSpace=wrap;html=1;",
    ElementClass.TRAPEZOID: "shape=trapezoid;perimeter=trapezoidPerimeter;whiteSpace=wrap;html=1;",
    ElementClass.TRIANGLE: "triangle;whiteSpace=wrap;html=1;direction=north;",
}

_EDGE_ENDS: dict[ElementClass, str] = {
    ElementClass.ARROW: "startArrow=none;endArrow=classic;",
    ElementClass.DOUBLE_ARROW: "startArrow=classic;endArrow=classic;",
    ElementClass.LINE: "startArrow=none;endArrow=none;",
}


def _f(v: float) -> str:
    s = f"{v:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def export_drawio(doc: DiagramDoc) -> bytes:
    """Serialize the document as draw.io-compatible mxGraphModel XML."""
    dpi = doc.dpi
    lines: list[str] = []
    lines.append('<?xml version="1.0" encoding="UTF-8"?>\n')
    lines.append(
        f'<mxGraphModel dx="0" dy="0" grid="0" gridSize="10" guides="1" tooltips="1"'
        f' connect="1" arrows="1" fold="1" page="1" pageScale="1"'
        f' pageWidth="{_f(doc.page_width * dpi)}" pageHeight="{_f(doc.page_height * dpi)}"'
        f' math="0" shadow="0">\n'
    )
    lines.append("  <root>\n")
    lines.append('    <mxCell id="0"/>\n')
    lines.append('    <mxCell id="1" parent="0"/>\n')

    for node in doc.shapes:
        box = center_to_corner(node.box).scaled(dpi)
        fill, stroke = PALETTE[node.cls]
        style = (
            _VERTEX_STYLES[node.cls]
            + f"fillColor=#{fill};strokeColor=#{stroke};"
            + f"fontSize={_f(label_font_size_pt(node.box.height))};"
        )
        value = quoteattr(node.label) if node.label is not None else '""'
        lines.append(
            f'    <mxCell id="n{node.id}" value={value} style={quoteattr(style)}'
            f' parent="1" vertex="1">\n'
        )
        lines.append(
            f'      <mxGeometry x="{_f(box.x0)}" y="{_f(box.y0)}"'
            f' width="{_f(box.width)}" height="{_f(box.height)}" as="geometry"/>\n'
        )
        lines.append("    </mxCell>\n")

    for edge in doc.connectors:
        style = "edgeStyle=none;rounded=0;html=1;" + _EDGE_ENDS[edge.kind]
        value = quoteattr(edge.label) if edge.label is not None else '""'
        attrs = ""
        points: list[str] = []
        for role, binding in (("source", edge.from_binding), ("target", edge.to_binding)):
            if isinstance(binding, Bound):
                attrs += f' {role}="n{binding.anchor.shape_id}"'
            else:
                assert isinstance(binding, Free)
                x, y = binding.position[0] * dpi, binding.position[1] * dpi
                points.append(
                    f'        <mxPoint x="{_f(x)}" y="{_f(y)}" as="{role}Point"/>\n'
                )
        lines.append(
            f'    <mxCell id="n{edge.id}" value={value} style={quoteattr(style)}'
            f' parent="1"{attrs} edge="1">\n'
        )
        if points:
            lines.append('      <mxGeometry relative="1" as="geometry">\n')
            lines.extend(points)
            lines.append("      </mxGeometry>\n")
        else:
            lines.append('      <mxGeometry relative="1" as="geometry"/>\n')
        lines.append("    </mxCell>\n")

    for ti, blk in enumerate(doc.free_texts):
        box = blk.bbox.scaled(dpi)
        style = (
            "text;html=1;align=center;verticalAlign=middle;"
            + f"fontSize={_f(label_font_size_pt(blk.bbox.height))};"
        )
        value = quoteattr(blk.content) if blk.content is not None else '""'
        lines.append(
            f'    <mxCell id="t{ti}" value={value} style={quoteattr(style)}'
            f' parent="1" vertex="1">\n'
        )
        lines.append(
            f'      <mxGeometry x="{_f(box.x0)}" y="{_f(box.y0)}"'
            f' width="{_f(box.width)}" height="{_f(box.height)}" as="geometry"/>\n'
        )
        lines.append("    </mxCell>\n")

    lines.append("  </root>\n")
    lines.append("</mxGraphModel>\n")
    return "".join(lines).encode("utf-8")


__all__ = ["export_drawio"]
