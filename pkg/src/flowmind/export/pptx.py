"""Minimal OOXML presentation (.pptx) export.

The package contains exactly the parts standard tooling needs: content
types, package/presentation relationships, one slide (with its layout,
master, and theme), nothing else.  Geometry is written in EMU (914,400 per
inch, rounded to the nearest integer); ZIP entries are written in a fixed
order with timestamps pinned to the DOS epoch so output is byte-stable.

Connection-site indices: the mapping from an anchor's site identity to the
OOXML connection-site index is pinned here, in one table:

* rectangle: 0=top, 1=left, 2=bottom, 3=right (the preset's own order);
* other polygons: outline vertex indices 0..n-1, then edge midpoints n..2n-1
  (an anchor quantizes to the nearest of edge start / midpoint / edge end);
* ellipse family: the eight candidate-site indices are used directly.
"""

from __future__ import annotations

import zipfile
from io import BytesIO
from xml.sax.saxutils import escape

from flowmind.connect import Bound, ELLIPSE_CLASSES, polygon_vertices
from flowmind.document import DiagramDoc
from flowmind.export import PALETTE, label_font_size_pt
from flowmind.geometry import ElementClass, Point, center_to_corner

EMU_PER_INCH = 914400

_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)


class PackageWriteError(OSError):
    """Writing the .pptx package to disk failed."""


def emu(value_in: float) -> int:
    """Inches -> EMU, rounded to the nearest integer."""
    return int(round(value_in * EMU_PER_INCH))


_PRESETS: dict[ElementClass, str] = {
    ElementClass.RECTANGLE: "rect",
    ElementClass.CIRCLE: "ellipse",
    ElementClass.DIAMOND: "diamond",
    ElementClass.HEXAGON: "hexagon",
    ElementClass.PARALLELOGRAM: "parallelogram",
    ElementClass.TRAPEZOID: "trapezoid",
    ElementClass.TRIANGLE: "triangle",
    ElementClass.LONG_OVAL: "roundRect",
}

# rect preset connection sites: 0=top, 1=left, 2=bottom, 3=right; our
# rectangle outline edges run top, right, bottom, left.
_RECT_EDGE_TO_SITE = {0: 0, 1: 3, 2: 2, 3: 1}

_POLYGON_VERTEX_COUNT: dict[ElementClass, int] = {
    ElementClass.RECTANGLE: 4,
    ElementClass.DIAMOND: 4,
    ElementClass.TRIANGLE: 3,
    ElementClass.PARALLELOGRAM: 4,
    ElementClass.TRAPEZOID: 4,
    ElementClass.HEXAGON: 6,
}


def pptx_site_index(cls: ElementClass, site_index: int, edge_t) -> int:
    """Quantize an anchor's site identity to an OOXML connection-site
    index per the pinned table above."""
    if cls in ELLIPSE_CLASSES:
        return site_index
    if cls is ElementClass.RECTANGLE:
        return _RECT_EDGE_TO_SITE[site_index]
    n = _POLYGON_VERTEX_COUNT[cls]
    t = 0.0 if edge_t is None else edge_t
    if t < 0.25:
        return site_index
    if t < 0.75:
        return n + site_index
    return (site_index + 1) % n


_CONTENT_TYPES = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">
    <Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>
    <Default Extension="xml" ContentType="application/xml"/>
    <Override PartName="/ppt/presentation.xml" ContentType="application/vnd.openxmlformats-presentationml.presentation.main+xml"/>
    <Override PartName="/ppt/slideMasters/slideMaster1.xml" ContentType="application/vnd.openxmlformats-presentationml.slideMaster+xml"/>
    <Override PartName="/ppt/slideLayouts/slideLayout1.xml" ContentType="application/vnd.openxmlformats-presentationml.slideLayout+xml"/>
    <Override PartName="/ppt/slides/slide1.xml" ContentType="application/vnd.openxmlformats-presentationml.slide+xml"/>
    <Override PartName="/ppt/theme/theme1.xml" ContentType="application/vnd.openxmlformats-drawingml.theme+xml"/>
</Types>"""

_ROOT_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
    <Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="ppt/presentation.xml"/>
</Relationships>"""

_PRESENTATION_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
    <Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideMaster" Target="slideMasters/slideMaster1.xml"/>
    <Relationship Id="rId2" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/slide" Target="slides/slide1.xml"/>
    <Relationship Id="rId3" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/theme" Target="theme/theme1.xml"/>
</Relationships>"""

_SLIDE_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
    <Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideLayout" Target="../slideLayouts/slideLayout1.xml"/>
</Relationships>"""

_MASTER_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
    <Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideLayout" Target="../slideLayouts/slideLayout1.xml"/>
    <Relationship Id="rId2" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/theme" Target="../theme/theme1.xml"/>
</Relationships>"""

_LAYOUT_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
    <Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideMaster" Target="../slideMasters/slideMaster1.xml"/>
</Relationships>"""


def _presentation_xml(cx: int, cy: int) -> str:
    return f"""<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<p:presentation xmlns:p="http://schemas.openxmlformats.org/presentationml/2006/main" xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships" saveSubsetFonts="1">
    <p:sldMasterIdLst>
        <p:sldMasterId id="2147483648" r:id="rId1"/>
    </p:sldMasterIdLst>
    <p:sldIdLst>
        <p:sldId id="256" r:id="rId2"/>
    </p:sldIdLst>
    <p:sldSz cx="{cx}" cy="{cy}"/>
    <p:notesSz cx="{cy}" cy="{cx}"/>
    <p:defaultTextStyle>
        <a:defPPr>
            <a:defRPr lang="en-US"/>
        </a:defPPr>
    </p:defaultTextStyle>
</p:presentation>"""


_SLIDE_MASTER = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<p:sldMaster xmlns:p="http://schemas.openxmlformats.org/presentationml/2006/main" xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships">
    <p:cSld>
        <p:bg>
            <p:bgPr>
                <a:solidFill><a:schemeClr val="bg1"/></a:solidFill>
                <a:effectLst/>
            </p:bgPr>
        </p:bg>
        <p:spTree>
            <p:nvGrpSpPr>
                <p:cNvPr id="1" name=""/>
                <p:cNvGrpSpPr/>
                <p:nvPr/>
            </p:nvGrpSpPr>
            <p:grpSpPr>
                <a:xfrm>
                    <a:off x="0" y="0"/>
                    <a:ext cx="0" cy="0"/>
                    <a:chOff x="0" y="0"/>
                    <a:chExt cx="0" cy="0"/>
                </a:xfrm>
            </p:grpSpPr>
        </p:spTree>
    </p:cSld>
    <p:clrMap bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2" accent1="accent1" accent2="accent2" accent3="accent3" accent4="accent4" accent5="accent5" accent6="accent6" hlink="hlink" folHlink="folHlink"/>
    <p:sldLayoutIdLst>
        <p:sldLayoutId id="2147483649" r:id="rId1"/>
    </p:sldLayoutIdLst>
    <p:txStyles>
        <p:titleStyle>
            <a:lvl1pPr>
                <a:defRPr sz="4400"/>
            </a:lvl1pPr>
        </p:titleStyle>
        <p:bodyStyle>
            <a:lvl1pPr>
                <a:defRPr sz="2800"/>
            </a:lvl1pPr>
        </p:bodyStyle>
        <p:otherStyle>
            <a:lvl1pPr>
                <a:defRPr sz="1800"/>
            </a:lvl1pPr>
        </p:otherStyle>
    </p:txStyles>
</p:sldMaster>"""

_SLIDE_LAYOUT = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<p:sldLayout xmlns:p="http://schemas.openxmlformats.org/presentationml/2006/main" xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" xmlns:r="http://schemas.openxmlformats.org/officeDocument/2006/relationships" type="blank" preserve="1">
    <p:cSld name="Blank">
        <p:spTree>
            <p:nvGrpSpPr>
                <p:cNvPr id="1" name=""/>
                <p:cNvGrpSpPr/>
                <p:nvPr/>
            </p:nvGrpSpPr>
            <p:grpSpPr>
                <a:xfrm>
                    <a:off x="0" y="0"/>
                    <a:ext cx="0" cy="0"/>
                    <a:chOff x="0" y="0"/>
                    <a:chExt cx="0" cy="0"/>
                </a:xfrm>
            </p:grpSpPr>
        </p:spTree>
    </p:cSld>
    <p:clrMapOvr>
        <a:masterClrMapping/>
    </p:clrMapOvr>
</p:sldLayout>"""

_THEME = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<a:theme xmlns:a="http://schemas.openxmlformats.org/drawingml/2006/main" name="Office Theme">
    <a:themeElements>
        <a:clrScheme name="Office">
            <a:dk1><a:sysClr val="windowText" lastClr="000000"/></a:dk1>
            <a:lt1><a:sysClr val="window" lastClr="FFFFFF"/></a:lt1>
            <a:dk2><a:srgbClr val="1F497D"/></a:dk2>
            <a:lt2><a:srgbClr val="EEECE1"/></a:lt2>
            <a:accent1><a:srgbClr val="4F81BD"/></a:accent1>
            <a:accent2><a:srgbClr val="F79646"/></a:accent2>
            <a:accent3><a:srgbClr val="9BBB59"/></a:accent3>
            <a:accent4><a:srgbClr val="8064A2"/></a:accent4>
            <a:accent5><a:srgbClr val="4BACC6"/></a:accent5>
            <a:accent6><a:srgbClr val="F366A7"/></a:accent6>
            <a:hlink><a:srgbClr val="0000FF"/></a:hlink>
            <a:folHlink><a:srgbClr val="800080"/></a:folHlink>
        </a:clrScheme>
        <a:fontScheme name="Office">
            <a:majorFont>
                <a:latin typeface="Calibri"/>
                <a:ea typeface=""/>
                <a:cs typeface=""/>
            </a:majorFont>
            <a:minorFont>
                <a:latin typeface="Calibri"/>
                <a:ea typeface=""/>
                <a:cs typeface=""/>
            </a:minorFont>
        </a:fontScheme>
        <a:fmtScheme name="Office">
            <a:fillStyleLst>
                <a:solidFill><a:schemeClr val="phClr"/></a:solidFill>
                <a:solidFill><a:schemeClr val="phClr"><a:tint val="50000"/></a:schemeClr></a:solidFill>
                <a:solidFill><a:schemeClr val="phClr"><a:shade val="75000"/></a:schemeClr></a:solidFill>
            </a:fillStyleLst>
            <a:lnStyleLst>
                <a:ln w="9525" cap="flat" cmpd="sng" algn="ctr">
                    <a:solidFill><a:schemeClr val="phClr"/></a:solidFill>
                    <a:prstDash val="solid"/>
                </a:ln>
                <a:ln w="25400" cap="flat" cmpd="sng" algn="ctr">
                    <a:solidFill><a:schemeClr val="phClr"/></a:solidFill>
                    <a:prstDash val="solid"/>
                </a:ln>
                <a:ln w="38100" cap="flat" cmpd="sng" algn="ctr">
                    <a:solidFill><a:schemeClr val="phClr"/></a:solidFill>
                    <a:prstDash val="solid"/>
                </a:ln>
            </a:lnStyleLst>
            <a:effectStyleLst>
                <a:effectStyle>
                    <a:effectLst/>
                </a:effectStyle>
                <a:effectStyle>
                    <a:effectLst/>
                </a:effectStyle>
                <a:effectStyle>
                    <a:effectLst/>
                </a:effectStyle>
            </a:effectStyleLst>
            <a:bgFillStyleLst>
                <a:solidFill><a:schemeClr val="phClr"/></a:solidFill>
                <a:solidFill><a:schemeClr val="phClr"/></a:solidFill>
                <a:solidFill><a:schemeClr val="phClr"/></a:solidFill>
            </a:bgFillStyleLst>
        </a:fmtScheme>
    </a:themeElements>
</a:theme>"""


def _txbody(label: str, size_pt: float) -> str:
    sz = int(round(size_pt * 100))
    if label == "":
        return (
            "            <p:txBody>\n"
            "                <a:bodyPr/>\n"
            "                <a:lstStyle/>\n"
            "                <a:p/>\n"
            "            </p:txBody>\n"
        )
    return (
        "            <p:txBody>\n"
        "                <a:bodyPr anchor=\"ctr\"/>\n"
        "                <a:lstStyle/>\n"
        "                <a:p>\n"
        "                    <a:pPr algn=\"ctr\"/>\n"
        "                    <a:r>\n"
        f"                        <a:rPr lang=\"en-US\" sz=\"{sz}\"/>\n"
        f"                        <a:t>{escape(label)}</a:t>\n"
        "                    </a:r>\n"
        "                </a:p>\n"
        "            </p:txBody>\n"
    )


def _shape_sp(nv_id: int, name: str, preset: str, x: int, y: int, cx: int, cy: int,
              fill: str, stroke: str, label: str, size_pt: float) -> str:
    return (
        "        <p:sp>\n"
        "            <p:nvSpPr>\n"
        f"                <p:cNvPr id=\"{nv_id}\" name=\"{escape(name)}\"/>\n"
        "                <p:cNvSpPr/>\n"
        "                <p:nvPr/>\n"
        "            </p:nvSpPr>\n"
        "            <p:spPr>\n"
        "                <a:xfrm>\n"
        f"                    <a:off x=\"{x}\" y=\"{y}\"/>\n"
        f"                    <a:ext cx=\"{cx}\" cy=\"{cy}\"/>\n"
        "                </a:xfrm>\n"
        f"                <a:prstGeom prst=\"{preset}\">\n"
        "                    <a:avLst/>\n"
        "                </a:prstGeom>\n"
        f"                <a:solidFill><a:srgbClr val=\"{fill.upper()}\"/></a:solidFill>\n"
        f"                <a:ln w=\"19050\"><a:solidFill><a:srgbClr val=\"{stroke.upper()}\"/></a:solidFill></a:ln>\n"
        "            </p:spPr>\n"
        + _txbody(label, size_pt)
        + "        </p:sp>\n"
    )


def _textbox_sp(nv_id: int, name: str, x: int, y: int, cx: int, cy: int,
                label: str, size_pt: float) -> str:
    return (
        "        <p:sp>\n"
        "            <p:nvSpPr>\n"
        f"                <p:cNvPr id=\"{nv_id}\" name=\"{escape(name)}\"/>\n"
        "                <p:cNvSpPr txBox=\"1\"/>\n"
        "                <p:nvPr/>\n"
        "            </p:nvSpPr>\n"
        "            <p:spPr>\n"
        "                <a:xfrm>\n"
        f"                    <a:off x=\"{x}\" y=\"{y}\"/>\n"
        f"                    <a:ext cx=\"{cx}\" cy=\"{cy}\"/>\n"
        "                </a:xfrm>\n"
        "                <a:prstGeom prst=\"rect\">\n"
        "                    <a:avLst/>\n"
        "                </a:prstGeom>\n"
        "                <a:noFill/>\n"
        "            </p:spPr>\n"
        + _txbody(label, size_pt)
        + "        </p:sp>\n"
    )


_HEAD_TAIL: dict[ElementClass, tuple[str, str]] = {
    ElementClass.ARROW: ("none", "triangle"),
    ElementClass.DOUBLE_ARROW: ("triangle", "triangle"),
    ElementClass.LINE: ("none", "none"),
}


def _connector_sp(nv_id: int, name: str, p1: Point, p2: Point,
                  st_ref: str, end_ref: str, kind: ElementClass) -> str:
    x = emu(min(p1[0], p2[0]))
    y = emu(min(p1[1], p2[1]))
    cx = abs(emu(p2[0]) - emu(p1[0]))
    cy = abs(emu(p2[1]) - emu(p1[1]))
    flips = ""
    if p2[0] < p1[0]:
        flips += " flipH=\"1\""
    if p2[1] < p1[1]:
        flips += " flipV=\"1\""
    head, tail = _HEAD_TAIL[kind]
    return (
        "        <p:cxnSp>\n"
        "            <p:nvCxnSpPr>\n"
        f"                <p:cNvPr id=\"{nv_id}\" name=\"{escape(name)}\"/>\n"
        "                <p:cNvCxnSpPr>\n"
        + st_ref
        + end_ref
        + "                </p:cNvCxnSpPr>\n"
        "                <p:nvPr/>\n"
        "            </p:nvCxnSpPr>\n"
        "            <p:spPr>\n"
        f"                <a:xfrm{flips}>\n"
        f"                    <a:off x=\"{x}\" y=\"{y}\"/>\n"
        f"                    <a:ext cx=\"{cx}\" cy=\"{cy}\"/>\n"
        "                </a:xfrm>\n"
        "                <a:prstGeom prst=\"line\">\n"
        "                    <a:avLst/>\n"
        "                </a:prstGeom>\n"
        "                <a:ln w=\"19050\">\n"
        "                    <a:solidFill><a:srgbClr val=\"000000\"/></a:solidFill>\n"
        f"                    <a:headEnd type=\"{head}\"/>\n"
        f"                    <a:tailEnd type=\"{tail}\"/>\n"
        "                </a:ln>\n"
        "            </p:spPr>\n"
        "        </p:cxnSp>\n"
    )


def _binding_point(binding) -> Point:
    if isinstance(binding, Bound):
        return binding.anchor.position
    return binding.position


def _slide_xml(doc: DiagramDoc) -> str:
    body: list[str] = []
    nv_id = 2
    nv_by_shape: dict[int, int] = {}
    shape_cls: dict[int, ElementClass] = {}
    for node in doc.shapes:
        nv_by_shape[node.id] = nv_id
        shape_cls[node.id] = node.cls
        box = center_to_corner(node.box)
        fill, stroke = PALETTE[node.cls]
        body.append(
            _shape_sp(
                nv_id,
                f"{node.cls.value} {node.id}",
                _PRESETS[node.cls],
                emu(box.x0),
                emu(box.y0),
                emu(box.width),
                emu(box.height),
                fill,
                stroke,
                node.label or "",
                label_font_size_pt(node.box.height),
            )
        )
        nv_id += 1
    for edge in doc.connectors:
        refs = []
        for tag, binding in (("stCxn", edge.from_binding), ("endCxn", edge.to_binding)):
            if isinstance(binding, Bound):
                sid = binding.anchor.shape_id
                idx = pptx_site_index(
                    shape_cls[sid], binding.anchor.site_index, binding.anchor.edge_t
                )
                refs.append(
                    f"                    <a:{tag} id=\"{nv_by_shape[sid]}\" idx=\"{idx}\"/>\n"
                )
            else:
                refs.append("")
        body.append(
            _connector_sp(
                nv_id,
                f"{edge.kind.value} {edge.id}",
                _binding_point(edge.from_binding),
                _binding_point(edge.to_binding),
                refs[0],
                refs[1],
                edge.kind,
            )
        )
        nv_id += 1
    for ti, blk in enumerate(doc.free_texts):
        body.append(
            _textbox_sp(
                nv_id,
                f"text {ti}",
                emu(blk.bbox.x0),
                emu(blk.bbox.y0),
                emu(blk.bbox.width),
                emu(blk.bbox.height),
                blk.content or "",
                label_font_size_pt(blk.bbox.height),
            )
        )
        nv_id += 1

    return (
        "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
        "<p:sld xmlns:p=\"http://schemas.openxmlformats.org/presentationml/2006/main\""
        " xmlns:a=\"http://schemas.openxmlformats.org/drawingml/2006/main\""
        " xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\">\n"
        "    <p:cSld>\n"
        "        <p:spTree>\n"
        "        <p:nvGrpSpPr>\n"
        "            <p:cNvPr id=\"1\" name=\"\"/>\n"
        "            <p:cNvGrpSpPr/>\n"
        "            <p:nvPr/>\n"
        "        </p:nvGrpSpPr>\n"
        "        <p:grpSpPr>\n"
        "            <a:xfrm>\n"
        "                <a:off x=\"0\" y=\"0\"/>\n"
        "                <a:ext cx=\"0\" cy=\"0\"/>\n"
        "                <a:chOff x=\"0\" y=\"0\"/>\n"
        "                <a:chExt cx=\"0\" cy=\"0\"/>\n"
        "            </a:xfrm>\n"
        "        </p:grpSpPr>\n"
        + "".join(body)
        + "        </p:spTree>\n"
        "    </p:cSld>\n"
        "    <p:clrMapOvr>\n"
        "        <a:masterClrMapping/>\n"
        "    </p:clrMapOvr>\n"
        "</p:sld>"
    )


PART_ORDER = (
    "[Content_Types].xml",
    "_rels/.rels",
    "ppt/presentation.xml",
    "ppt/_rels/presentation.xml.rels",
    "ppt/slides/slide1.xml",
    "ppt/slides/_rels/slide1.xml.rels",
    "ppt/slideLayouts/slideLayout1.xml",
    "ppt/slideLayouts/_rels/slideLayout1.xml.rels",
    "ppt/slideMasters/slideMaster1.xml",
    "ppt/slideMasters/_rels/slideMaster1.xml.rels",
    "ppt/theme/theme1.xml",
)


def build_parts(doc: DiagramDoc) -> dict[str, bytes]:
    """All package parts, keyed by part name (see PART_ORDER)."""
    return {
        "[Content_Types].xml": _CONTENT_TYPES.encode("utf-8"),
        "_rels/.rels": _ROOT_RELS.encode("utf-8"),
        "ppt/presentation.xml": _presentation_xml(
            emu(doc.page_width), emu(doc.page_height)
        ).encode("utf-8"),
        "ppt/_rels/presentation.xml.rels": _PRESENTATION_RELS.encode("utf-8"),
        "ppt/slides/slide1.xml": _slide_xml(doc).encode("utf-8"),
        "ppt/slides/_rels/slide1.xml.rels": _SLIDE_RELS.encode("utf-8"),
        "ppt/slideLayouts/slideLayout1.xml": _SLIDE_LAYOUT.encode("utf-8"),
        "ppt/slideLayouts/_rels/slideLayout1.xml.rels": _LAYOUT_RELS.encode("utf-8"),
        "ppt/slideMasters/slideMaster1.xml": _SLIDE_MASTER.encode("utf-8"),
        "ppt/slideMasters/_rels/slideMaster1.xml.rels": _MASTER_RELS.encode("utf-8"),
        "ppt/theme/theme1.xml": _THEME.encode("utf-8"),
    }


def zip_parts(parts: dict[str, bytes]) -> bytes:
    """Write parts into a ZIP in PART_ORDER with epoch timestamps."""
    buf = BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        for name in PART_ORDER:
            info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, parts[name])
    return buf.getvalue()


def export_pptx(doc: DiagramDoc) -> bytes:
    """Serialize the document as a minimal editable .pptx package."""
    return zip_parts(build_parts(doc))


def save_pptx(doc: DiagramDoc, path: str) -> None:
    """Write the package to disk; raises PackageWriteError on failure."""
    data = export_pptx(doc)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise PackageWriteError(f"cannot write {path}: {exc}") from exc


__all__ = [
    "EMU_PER_INCH",
    "PART_ORDER",
    "PackageWriteError",
    "build_parts",
    "emu",
    "export_pptx",
    "pptx_site_index",
    "save_pptx",
    "zip_parts",
]
