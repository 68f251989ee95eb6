"""Release acceptance gate.

One test per release criterion.  Each test prints a single ``[PASS]``/
``[FAIL]`` line naming its criterion (run with ``-s`` or ``-v`` to see
the lines), and each asserts at the tolerance the criterion states.
Oracles are imported from the per-module suites so the same independent
re-derivations back both layers; all randomness here uses local seeded
generators, so every run checks the identical instances.
"""

from __future__ import annotations

import json
import math
import random
import time
import xml.etree.ElementTree as ET
import zipfile
from contextlib import contextmanager
from fractions import Fraction
from io import BytesIO

import numpy as np

from flowmind.cli import main as cli_main
from flowmind.connect import Bound, resolve_connections
from flowmind.document import DiagramDoc
from flowmind.export import export_drawio, export_pptx, export_svg
from flowmind.export.pptx import EMU_PER_INCH, PART_ORDER
from flowmind.geometry import (
    CenterBox,
    CornerBox,
    Detection,
    ElementClass,
    KeypointPair,
    center_to_corner,
    corner_to_center,
    iou,
    point_segment_distance,
)
from flowmind.ingest import DocumentInput
from flowmind.layout import GOLDEN_DIVISOR, LayoutConfig, autotypeset
from flowmind.metrics import (
    cer,
    detection_metrics,
    diagram_accuracy,
    match_detections,
)
from flowmind.nms import NmsConfig, cross_class_nms
from flowmind.synth import Perturbation, SynthConfig, generate
from flowmind.text import ShapeLabel, Standalone, merge_text_boxes

from conftest import box, det
from test_connect import SHAPES as SHAPE_CLASSES
from test_connect import oracle_bind, oracle_gap
from test_export import random_doc, sample_doc
from test_layout import make_doc, preset_doc
from test_metrics import oracle_levenshtein
from test_nms import oracle_nms
from test_text import oracle_standalone_partition, text_det


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def docin(elements):
    return DocumentInput(
        image_width=960, image_height=480, image_path=None, elements=tuple(elements)
    )


def test_identity_pipeline_runs_clean_and_fast(tmp_path):
    with criterion(
        "identity pipeline: convert + eval on a 100-image seed-42 noise-free "
        "corpus scores all 1.0 in under 10 s"
    ):
        corpus = tmp_path / "corpus"
        assert (
            cli_main(["synth", "--out", str(corpus), "--seed", "42", "--n", "100"])
            == 0
        )
        start = time.monotonic()
        out_dir = tmp_path / "out"
        assert cli_main(["convert", str(corpus), "--out", str(out_dir)]) == 0
        report_path = tmp_path / "eval.json"
        assert (
            cli_main(
                [
                    "eval",
                    "--pred",
                    str(corpus),
                    "--gt",
                    str(corpus),
                    "--json",
                    "--out",
                    str(report_path),
                ]
            )
            == 0
        )
        elapsed = time.monotonic() - start
        payload = json.loads(report_path.read_text(encoding="utf-8"))
        detection = payload["detection"]
        assert detection["weighted_precision"] == 1.0
        assert detection["weighted_recall"] == 1.0
        assert detection["weighted_f1"] == 1.0
        assert detection["diagram_accuracy"] == 1.0
        assert payload["connections"]["f1"] == 1.0
        assert payload["text"]["corpus_cer"] == 0.0
        for i in range(100):
            assert (out_dir / f"img{i:04d}.svg").is_file()
        assert elapsed < 10.0, f"convert + eval took {elapsed:.2f}s"


def test_box_conversion_is_exact():
    with criterion(
        "box conversion: three pinned examples bit-exact and a 10,000-box "
        "lattice round trip with zero error"
    ):
        assert corner_to_center(CornerBox(0, 0, 4, 2)) == CenterBox(2, 1, 4, 2)
        assert corner_to_center(CornerBox(3, 3, 3, 3)) == CenterBox(3, 3, 0, 0)
        assert corner_to_center(CornerBox(10, 20, 30, 60)) == CenterBox(20, 40, 20, 40)
        assert center_to_corner(CenterBox(2, 1, 4, 2)) == CornerBox(0, 0, 4, 2)

        rng = np.random.default_rng(2042)
        ints = rng.integers(0, 2**21, size=(10_000, 4))
        factor = 2.0**-8  # quarter-of-a-pixel-and-finer lattice, exact in binary
        for k, r in enumerate(ints):
            x0, x1 = sorted((int(r[0]), int(r[2])))
            y0, y1 = sorted((int(r[1]), int(r[3])))
            b = CornerBox(x0 * factor, y0 * factor, x1 * factor, y1 * factor)
            c = corner_to_center(b)
            # the defining arithmetic, recomputed here, must match bit-exactly
            assert c.xc == abs(b.x0 + b.x1) / 2
            assert c.yc == abs(b.y0 + b.y1) / 2
            assert c.width == abs(b.x0 - b.x1)
            assert c.height == abs(b.y0 - b.y1)
            assert center_to_corner(c) == b
            if k < 500:  # exact-rational spot check
                assert Fraction(c.xc) == (Fraction(b.x0) + Fraction(b.x1)) / 2
                assert Fraction(c.width) == Fraction(b.x1) - Fraction(b.x0)


def test_connection_resolution_matches_exhaustive_oracle():
    with criterion(
        "connection resolution: equals the exhaustive shape-by-site oracle on "
        "1,000 random instances; off-segment feet fall back to endpoint distance"
    ):
        # Directed endpoint-fallback fixtures.
        assert point_segment_distance((5, 3), (0, 0), (10, 0)) == (3.0, True)
        assert point_segment_distance((12, 0), (0, 0), (10, 0)) == (2.0, False)
        assert point_segment_distance((13, 4), (0, 0), (10, 0)) == (5.0, False)

        # A keypoint in a corner region binds at the vertex with the
        # endpoint distance, and that distance decides which shape wins.
        shapes = [
            (0, ElementClass.RECTANGLE, CornerBox(0, 0, 10, 10)),
            (1, ElementClass.RECTANGLE, CornerBox(30, 0, 40, 10)),
        ]
        conn = det(
            ElementClass.ARROW,
            CornerBox(13, -4, 29, 5),
            keypoints=KeypointPair((13, -4), (29, 5)),
        )
        edge = resolve_connections(shapes, [conn])[0]
        assert edge.from_binding.anchor.shape_id == 0
        assert math.isclose(edge.from_binding.distance, 5.0, abs_tol=1e-9)
        assert edge.from_binding.anchor.position == (10.0, 0.0)
        # ... while the other endpoint sees a clean perpendicular foot
        assert edge.to_binding.anchor.shape_id == 1
        assert math.isclose(edge.to_binding.distance, 1.0, abs_tol=1e-9)
        assert edge.to_binding.anchor.position == (30.0, 5.0)

        rng = np.random.default_rng(1042)

        def random_box():
            x0, y0 = rng.uniform(0, 160, size=2)
            w, h = rng.uniform(4, 60, size=2)
            return CornerBox(float(x0), float(y0), float(x0 + w), float(y0 + h))

        checked = 0
        for _ in range(1000):
            n_shapes = int(rng.integers(1, 11))
            shapes = [
                (sid, SHAPE_CLASSES[int(rng.integers(0, len(SHAPE_CLASSES)))], random_box())
                for sid in range(n_shapes)
            ]
            connectors = []
            for _ in range(int(rng.integers(1, 16))):
                p1 = tuple(float(v) for v in rng.uniform(-20, 220, size=2))
                p2 = tuple(float(v) for v in rng.uniform(-20, 220, size=2))
                bb = CornerBox(
                    min(p1[0], p2[0]),
                    min(p1[1], p2[1]),
                    max(p1[0], p2[0]),
                    max(p1[1], p2[1]),
                )
                connectors.append(
                    det(ElementClass.ARROW, bb, keypoints=KeypointPair(p1, p2))
                )
            edges = resolve_connections(shapes, connectors)
            for edge, conn in zip(edges, connectors):
                for binding, p in (
                    (edge.from_binding, conn.keypoints.from_xy),
                    (edge.to_binding, conn.keypoints.to_xy),
                ):
                    dist, sid, site, pos = oracle_bind(p, shapes)
                    assert isinstance(binding, Bound)
                    assert math.isclose(binding.distance, dist, abs_tol=1e-9)
                    assert math.isclose(binding.anchor.position[0], pos[0], abs_tol=1e-9)
                    assert math.isclose(binding.anchor.position[1], pos[1], abs_tol=1e-9)
                    if oracle_gap(p, shapes) < 1e-9:
                        continue  # vertex tie: winner identity is sub-ulp noise
                    assert binding.anchor.shape_id == sid
                    assert binding.anchor.site_index == site
                    checked += 1
        assert checked > 5000


def test_cross_class_suppression_contract():
    with criterion(
        "cross-class suppression: no surviving pair above threshold, greedy "
        "oracle equality through n=12, idempotent on 500 inputs, pinned at "
        "0.5 and 0.8"
    ):
        rng = np.random.default_rng(3042)
        classes = sorted(ElementClass, key=lambda c: c.value)

        def random_detections(n):
            out = []
            for _ in range(n):
                x0, y0 = rng.uniform(0, 40, size=2)
                w, h = rng.uniform(1, 20, size=2)
                cls = classes[int(rng.integers(0, len(classes)))]
                kp = None
                if cls in (
                    ElementClass.ARROW,
                    ElementClass.DOUBLE_ARROW,
                    ElementClass.LINE,
                ):
                    kp = KeypointPair((float(x0), float(y0)), (float(x0 + w), float(y0 + h)))
                out.append(
                    det(
                        cls,
                        CornerBox(float(x0), float(y0), float(x0 + w), float(y0 + h)),
                        float(rng.uniform(0, 1)),
                        kp,
                    )
                )
            return out

        for threshold in (0.5, 0.8):
            cfg = NmsConfig(iou_threshold=threshold)
            # oracle equality, exhaustive in n: every size 0..12, many draws
            for n in range(13):
                for _ in range(25):
                    elements = random_detections(n)
                    got = cross_class_nms(elements, cfg)
                    assert got == oracle_nms(elements, threshold)
            # survivor-pair invariant on larger inputs
            for _ in range(100):
                survivors = cross_class_nms(random_detections(30), cfg)
                for i in range(len(survivors)):
                    for j in range(i + 1, len(survivors)):
                        assert iou(survivors[i].bbox, survivors[j].bbox) <= threshold

        # idempotence on 500 random inputs at the default threshold
        for _ in range(500):
            once = cross_class_nms(random_detections(int(rng.integers(0, 25))))
            assert cross_class_nms(once) == once


def test_layout_constants_idempotence_and_column_fixture():
    with criterion(
        "auto-layout: default thresholds 1.0/0.8 inch with divisor 1.618, "
        "idempotent within 1e-9 inch on 200 documents, clustering objective "
        "never increases, and a jittered column snaps to one size and one "
        "x-column"
    ):
        cfg = LayoutConfig()
        assert cfg.stage1_t1 == 1.0
        assert cfg.stage2_t1 == 0.8
        assert cfg.t2_divisor == 1.618
        assert GOLDEN_DIVISOR == 1.618
        _doc, report = autotypeset(preset_doc(5, np.random.default_rng(0)))
        assert report.config.stage1_t1 == 1.0
        assert report.config.stage2_t1 == 0.8
        assert report.config.t2_divisor == 1.618

        rng = np.random.default_rng(4042)
        for _ in range(200):
            doc = preset_doc(int(rng.integers(1, 10)), rng)
            once, rep1 = autotypeset(doc)
            twice, rep2 = autotypeset(once)
            for a, b in zip(once.shapes, twice.shapes):
                assert math.isclose(a.box.xc, b.box.xc, abs_tol=1e-9)
                assert math.isclose(a.box.yc, b.box.yc, abs_tol=1e-9)
                assert math.isclose(a.box.width, b.box.width, abs_tol=1e-9)
                assert math.isclose(a.box.height, b.box.height, abs_tol=1e-9)
            for rep in (rep1, rep2):
                for stage in (rep.resize, rep.align_x, rep.align_y):
                    hist = stage.objective_history
                    assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))

        column = make_doc(
            [
                (2.00, 1.0, 1.00, 0.60),
                (2.05, 2.5, 1.02, 0.58),
                (1.97, 4.0, 0.98, 0.61),
                (2.02, 5.5, 1.01, 0.60),
            ]
        )
        out, _ = autotypeset(column)
        sizes = {(round(s.box.width, 12), round(s.box.height, 12)) for s in out.shapes}
        assert len(sizes) == 1
        assert len({round(s.box.xc, 12) for s in out.shapes}) == 1
        assert [s.box.yc for s in out.shapes] == [1.0, 2.5, 4.0, 5.5]


def test_metric_edge_rules_cer_oracle_and_diagram_accuracy():
    with criterion(
        "metrics: zero-prediction images yield N/A precision and leave that "
        "average, zero precision and recall give F1 0, character error rate "
        "matches the DP oracle on 1,000 pairs plus three pinned examples, and "
        "one extra box on one of four images gives diagram accuracy 0.75"
    ):
        def rect(b, score=1.0):
            return det(ElementClass.RECTANGLE, b, score)

        # N/A rules
        empty_pred = docin([])
        five_gt = docin([rect(box(i * 110, 0, i * 110 + 100, 100)) for i in range(5)])
        row = detection_metrics([match_detections(empty_pred, five_gt)]).per_image[0]
        assert row.precision is None
        assert row.recall == 0.0
        assert row.f1 is None

        disjoint = detection_metrics(
            [
                match_detections(
                    docin([rect(box(0, 0, 100, 100))]),
                    docin([rect(box(500, 0, 600, 100))]),
                )
            ]
        ).per_image[0]
        assert disjoint.precision == 0.0
        assert disjoint.recall == 0.0
        assert disjoint.f1 == 0.0

        perfect = docin([rect(box(0, 0, 100, 100))])
        combined = detection_metrics(
            [
                match_detections(perfect, perfect),
                match_detections(empty_pred, five_gt),
            ]
        ).per_class[ElementClass.RECTANGLE]
        assert combined.precision == 1.0  # second image excluded: no predictions
        assert math.isclose(combined.recall, 0.5)

        # character error rate
        assert cer("abc", "abc") == 0.0
        assert cer("flaw", "flow") == 0.25
        assert cer("", "ab") == 1.0
        alphabet = "abcdeXYZ 01αβ"
        rnd = random.Random(5042)
        for _ in range(1000):
            a = "".join(rnd.choice(alphabet) for _ in range(rnd.randint(0, 30)))
            b = "".join(rnd.choice(alphabet) for _ in range(rnd.randint(0, 30)))
            assert cer(a, b) == oracle_levenshtein(a, b) / max(1, len(b))

        # diagram accuracy on a constructed four-image corpus
        good = docin(
            [rect(box(0, 0, 100, 100)), det(ElementClass.CIRCLE, box(200, 0, 300, 100))]
        )
        extra = docin(list(good.elements) + [rect(box(400, 0, 500, 100))])
        pairs = [(good, good)] * 3 + [(extra, good)]
        assert diagram_accuracy(pairs) == 0.75
        report = detection_metrics([match_detections(p, g) for p, g in pairs])
        assert report.diagram_accuracy == 0.75


def test_text_attachment_threshold_and_merge_oracle():
    with criterion(
        "text association: the 0.8 containment threshold reproduces the three "
        "pinned cases; merging is idempotent and matches the connected-"
        "component oracle on 500 layouts"
    ):
        shapes = [(0, ElementClass.RECTANGLE, box(0, 0, 10, 10))]

        def attach(text_box):
            return merge_text_boxes([text_det(text_box)], shapes)[0].attachment

        assert attach(box(2, 2, 8, 4)) == ShapeLabel(0)  # fully contained
        assert isinstance(attach(box(20, 20, 30, 30)), Standalone)  # outside
        assert isinstance(attach(box(-5, 0, 5, 10)), Standalone)  # half: 0.5 < 0.8
        assert attach(box(2, 2, 12, 4)) == ShapeLabel(0)  # exactly 0.8 attaches

        rng = np.random.default_rng(6042)
        for trial in range(500):
            n = int(rng.integers(0, 12))
            boxes = []
            for _ in range(n):
                x0, y0 = rng.uniform(0, 60, size=2)
                w, h = rng.uniform(2, 25, size=2)
                boxes.append(box(float(x0), float(y0), float(x0 + w), float(y0 + h)))
            blocks = merge_text_boxes([text_det(b) for b in boxes])
            got = {frozenset(blk.members) for blk in blocks}
            assert got == oracle_standalone_partition(boxes, 0.1)
            if trial < 200:  # idempotence: merging the merged boxes is a no-op
                again = merge_text_boxes([text_det(blk.bbox) for blk in blocks])
                assert sorted(b.bbox.as_tuple() for b in again) == sorted(
                    b.bbox.as_tuple() for b in blocks
                )


def test_export_determinism_and_package_structure():
    with criterion(
        "exports: all three formats byte-stable across runs, draw.io cell "
        "count = shapes + connectors + free texts + 2, the slide package "
        "holds exactly the fixed part list with geometry within 1 EMU, and "
        "empty documents export validly"
    ):
        docs = [sample_doc(), DiagramDoc(10.0, 5.0, 96.0)]
        rng = np.random.default_rng(7042)
        docs += [random_doc(rng) for _ in range(10)]
        for doc in docs:
            for exporter in (export_svg, export_drawio, export_pptx):
                assert len({exporter(doc) for _ in range(3)}) == 1

        rng = np.random.default_rng(7043)
        for _ in range(50):
            doc = random_doc(rng)
            root = ET.fromstring(export_drawio(doc))
            expected = len(doc.shapes) + len(doc.connectors) + len(doc.free_texts) + 2
            assert len(root.findall(".//mxCell")) == expected

        ns = {
            "p": "http://schemas.openxmlformats.org/presentationml/2006/main",
            "a": "http://schemas.openxmlformats.org/drawingml/2006/main",
        }
        rng = np.random.default_rng(7044)
        for _ in range(20):
            doc = random_doc(rng)
            with zipfile.ZipFile(BytesIO(export_pptx(doc))) as zf:
                assert tuple(zf.namelist()) == PART_ORDER
                assert zf.testzip() is None
                slide = ET.fromstring(zf.read("ppt/slides/slide1.xml"))
            sps = slide.findall(".//p:sp", ns)
            for node, sp in zip(doc.shapes, sps[: len(doc.shapes)]):
                corner = center_to_corner(node.box)
                off = sp.find(".//a:off", ns)
                ext = sp.find(".//a:ext", ns)
                assert abs(int(off.get("x")) - corner.x0 * EMU_PER_INCH) <= 1
                assert abs(int(off.get("y")) - corner.y0 * EMU_PER_INCH) <= 1
                assert abs(int(ext.get("cx")) - corner.width * EMU_PER_INCH) <= 1
                assert abs(int(ext.get("cy")) - corner.height * EMU_PER_INCH) <= 1

        empty = DiagramDoc(10.0, 5.0, 96.0)
        assert ET.fromstring(export_svg(empty)).tag.endswith("svg")
        assert len(ET.fromstring(export_drawio(empty)).findall(".//mxCell")) == 2
        with zipfile.ZipFile(BytesIO(export_pptx(empty))) as zf:
            assert tuple(zf.namelist()) == PART_ORDER
            for name in zf.namelist():
                ET.fromstring(zf.read(name))


def test_detection_noise_degrades_f1_monotonically():
    with criterion(
        "noise robustness: over 50 fixed seeds, mean weighted F1 never "
        "increases as drop probability steps through 0, 0.1, 0.2, 0.4"
    ):
        means = []
        for drop_prob in (0.0, 0.1, 0.2, 0.4):
            values = []
            for seed in range(50):
                cfg = SynthConfig(
                    seed=seed,
                    n_images=3,
                    perturbation=Perturbation(drop_prob=drop_prob),
                )
                matchings = [
                    match_detections(noisy, truth) for truth, noisy in generate(cfg)
                ]
                f1 = detection_metrics(matchings).weighted_f1
                assert f1 is not None
                values.append(f1)
            means.append(sum(values) / len(values))
        assert means[0] == 1.0
        assert all(b <= a + 1e-12 for a, b in zip(means, means[1:])), means


def test_primary_suite_is_self_contained(tmp_path):
    with criterion(
        "independence: the conversion package never imports the detector "
        "adapter, and the full pipeline runs on synthetic input alone"
    ):
        import flowmind

        package_root = __import__("pathlib").Path(flowmind.__file__).parent
        for source in package_root.rglob("*.py"):
            text = source.read_text(encoding="utf-8")
            assert "import detector" not in text
            assert "from detector" not in text

        corpus = tmp_path / "corpus"
        assert cli_main(["synth", "--out", str(corpus), "--seed", "1", "--n", "2"]) == 0
        assert cli_main(["convert", str(corpus), "--out", str(tmp_path / "out")]) == 0
        assert (tmp_path / "out" / "img0000.svg").is_file()
