"""Evaluation metrics: two-threshold detection matching, per-class and
weighted precision/recall/F1, diagram accuracy, connector connection-level
scoring, and character error rate.

Matching is greedy one-to-one per class by descending IoU.  A pair is a
candidate at IoU >= match_iou and earns credit ("scored") at IoU >=
score_iou.  In the default strict mode, matched-but-not-scored pairs count
as a false positive plus a false negative; the lenient switch discards them
from both sides instead.  Ratios with a zero denominator are N/A (None) and
excluded from averages; F1 is N/A when either input is, and 0 when precision
and recall are both 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from flowmind import kernels
from flowmind.connect import Bound, Free, resolve_connections
from flowmind.geometry import (
    CONNECTOR_CLASSES,
    ElementClass,
    iou,
    is_connector,
    is_shape,
)
from flowmind.ingest import DocumentInput


class ImageMismatch(ValueError):
    """Prediction and ground truth reference differently sized images."""


class UnresolvedConnections(RuntimeError):
    """Connector scoring needs resolvable connectors (keypoints present)."""


@dataclass(frozen=True)
class EvalConfig:
    """Thresholds in (0, 1].  ``lenient`` discards matched-but-not-scored
    pairs instead of counting them FP+FN; ``arrow_ordered`` compares arrow
    endpoints as an ordered pair."""

    match_iou: float = 0.5
    score_iou: float = 0.7
    da_iou: float = 0.8
    lenient: bool = False
    arrow_ordered: bool = True

    def __post_init__(self) -> None:
        for name in ("match_iou", "score_iou", "da_iou"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")


@dataclass(frozen=True)
class MatchPair:
    pred_index: int
    gt_index: int
    iou: float
    scored: bool


@dataclass
class Matching:
    """One-to-one per-class matching between a prediction document and a
    ground-truth document for the same image."""

    pred: DocumentInput
    gt: DocumentInput
    pairs: list[MatchPair] = field(default_factory=list)
    unmatched_pred: list[int] = field(default_factory=list)
    unmatched_gt: list[int] = field(default_factory=list)


def match_detections(
    pred: DocumentInput, gt: DocumentInput, config: EvalConfig = EvalConfig()
) -> Matching:
    """Greedy per-class matching by descending IoU; ties break on
    (pred index, gt index)."""
    if (pred.image_width, pred.image_height) != (gt.image_width, gt.image_height):
        raise ImageMismatch(
            f"image size mismatch: {pred.image_width}x{pred.image_height} vs "
            f"{gt.image_width}x{gt.image_height}"
        )
    pairs: list[MatchPair] = []
    matched_p: set[int] = set()
    matched_g: set[int] = set()
    for cls in ElementClass:
        p_idx = [i for i, d in enumerate(pred.elements) if d.cls is cls]
        g_idx = [j for j, d in enumerate(gt.elements) if d.cls is cls]
        if not p_idx or not g_idx:
            continue
        candidates = []
        for pi in p_idx:
            for gj in g_idx:
                v = iou(pred.elements[pi].bbox, gt.elements[gj].bbox)
                if v >= config.match_iou:
                    candidates.append((-v, pi, gj))
        candidates.sort()
        for neg_v, pi, gj in candidates:
            if pi in matched_p or gj in matched_g:
                continue
            matched_p.add(pi)
            matched_g.add(gj)
            pairs.append(MatchPair(pi, gj, -neg_v, -neg_v >= config.score_iou))
    pairs.sort(key=lambda p: (p.pred_index, p.gt_index))
    return Matching(
        pred=pred,
        gt=gt,
        pairs=pairs,
        unmatched_pred=[i for i in range(len(pred.elements)) if i not in matched_p],
        unmatched_gt=[j for j in range(len(gt.elements)) if j not in matched_g],
    )


def _ratio(num: int, den: int) -> Optional[float]:
    return None if den == 0 else num / den


def _f1(precision: Optional[float], recall: Optional[float]) -> Optional[float]:
    if precision is None or recall is None:
        return None
    if precision == 0.0 and recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _avg(values: list[Optional[float]]) -> Optional[float]:
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


def _prf(
    scored: int, discarded: int, pred_count: int, gt_count: int, lenient: bool
) -> tuple[Optional[float], Optional[float], Optional[float]]:
    if lenient:
        pred_count -= discarded
        gt_count -= discarded
    precision = _ratio(scored, pred_count)
    recall = _ratio(scored, gt_count)
    return precision, recall, _f1(precision, recall)


@dataclass
class ImageRow:
    """Per-image overall metrics (all classes pooled)."""

    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    diagram_accurate: bool
    pred_count: int
    gt_count: int


@dataclass
class ClassRow:
    """Per-class metrics averaged over images (per-metric N/A exclusion)."""

    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    pred_count: int
    gt_count: int


@dataclass
class MetricsReport:
    per_class: dict[ElementClass, ClassRow]
    per_image: list[ImageRow]
    macro_precision: Optional[float]
    macro_recall: Optional[float]
    macro_f1: Optional[float]
    weighted_precision: Optional[float]
    weighted_recall: Optional[float]
    weighted_f1: Optional[float]
    diagram_accuracy: Optional[float]


def _image_prf_for(
    matching: Matching, cls: Optional[ElementClass], config: EvalConfig
) -> tuple[Optional[float], Optional[float], Optional[float], int, int]:
    if cls is None:
        pred_count = len(matching.pred.elements)
        gt_count = len(matching.gt.elements)
        cls_pairs = matching.pairs
    else:
        pred_count = sum(1 for d in matching.pred.elements if d.cls is cls)
        gt_count = sum(1 for d in matching.gt.elements if d.cls is cls)
        cls_pairs = [
            p for p in matching.pairs if matching.gt.elements[p.gt_index].cls is cls
        ]
    scored = sum(1 for p in cls_pairs if p.scored)
    discarded = sum(1 for p in cls_pairs if not p.scored)
    precision, recall, f1 = _prf(
        scored, discarded, pred_count, gt_count, config.lenient
    )
    return precision, recall, f1, pred_count, gt_count


def image_diagram_accurate(
    pred: DocumentInput, gt: DocumentInput, config: EvalConfig = EvalConfig()
) -> bool:
    """True when every element matches one-to-one at IoU >= da_iou with the
    correct class and there are no extra or missing elements."""
    da_match = match_detections(
        pred, gt, EvalConfig(match_iou=config.da_iou, score_iou=config.da_iou)
    )
    return not da_match.unmatched_pred and not da_match.unmatched_gt


def diagram_accuracy(
    doc_pairs: Sequence[tuple[DocumentInput, DocumentInput]],
    config: EvalConfig = EvalConfig(),
) -> Optional[float]:
    """Fraction of images that are completely correct at the da_iou
    threshold."""
    if not doc_pairs:
        return None
    good = sum(
        1 for pred, gt in doc_pairs if image_diagram_accurate(pred, gt, config)
    )
    return good / len(doc_pairs)


def detection_metrics(
    matchings: Sequence[Matching], config: EvalConfig = EvalConfig()
) -> MetricsReport:
    """Aggregate detection metrics over a corpus of per-image matchings."""
    per_image: list[ImageRow] = []
    per_class_rows: dict[ElementClass, dict[str, list[Optional[float]]]] = {
        cls: {"p": [], "r": [], "f": []} for cls in ElementClass
    }
    class_pred_counts: dict[ElementClass, int] = {cls: 0 for cls in ElementClass}
    class_gt_counts: dict[ElementClass, int] = {cls: 0 for cls in ElementClass}

    for m in matchings:
        p, r, f, pc, gc = _image_prf_for(m, None, config)
        per_image.append(
            ImageRow(
                precision=p,
                recall=r,
                f1=f,
                diagram_accurate=image_diagram_accurate(m.pred, m.gt, config),
                pred_count=pc,
                gt_count=gc,
            )
        )
        for cls in ElementClass:
            cp, cr, cf, cpc, cgc = _image_prf_for(m, cls, config)
            class_pred_counts[cls] += cpc
            class_gt_counts[cls] += cgc
            if cpc or cgc:
                per_class_rows[cls]["p"].append(cp)
                per_class_rows[cls]["r"].append(cr)
                per_class_rows[cls]["f"].append(cf)

    per_class: dict[ElementClass, ClassRow] = {}
    for cls in ElementClass:
        if class_pred_counts[cls] == 0 and class_gt_counts[cls] == 0:
            continue
        per_class[cls] = ClassRow(
            precision=_avg(per_class_rows[cls]["p"]),
            recall=_avg(per_class_rows[cls]["r"]),
            f1=_avg(per_class_rows[cls]["f"]),
            pred_count=class_pred_counts[cls],
            gt_count=class_gt_counts[cls],
        )

    def weighted(metric: str) -> Optional[float]:
        num = 0.0
        den = 0
        for cls, row in per_class.items():
            v = getattr(row, metric)
            w = class_gt_counts[cls]
            if v is not None and w > 0:
                num += v * w
                den += w
        return num / den if den else None

    da = None
    if per_image:
        da = sum(1 for row in per_image if row.diagram_accurate) / len(per_image)
    return MetricsReport(
        per_class=per_class,
        per_image=per_image,
        macro_precision=_avg([r.precision for r in per_class.values()]),
        macro_recall=_avg([r.recall for r in per_class.values()]),
        macro_f1=_avg([r.f1 for r in per_class.values()]),
        weighted_precision=weighted("precision"),
        weighted_recall=weighted("recall"),
        weighted_f1=weighted("f1"),
        diagram_accuracy=da,
    )


@dataclass
class ConnectorKindRow:
    """Connection-level counts for one connector kind in one image."""

    tp: int
    fp: int
    fn: int
    pred_count: int
    gt_count: int
    discarded: int

    @property
    def precision(self) -> Optional[float]:
        return _ratio(self.tp, self.pred_count - self.discarded)

    @property
    def recall(self) -> Optional[float]:
        return _ratio(self.tp, self.gt_count - self.discarded)

    @property
    def f1(self) -> Optional[float]:
        return _f1(self.precision, self.recall)


def _endpoint_signature(binding, shape_map: Optional[dict[int, int]]):
    if isinstance(binding, Bound):
        sid = binding.anchor.shape_id
        if shape_map is None:
            return ("shape", sid)
        if sid in shape_map:
            return ("shape", shape_map[sid])
        return ("unmapped", sid)
    assert isinstance(binding, Free)
    return ("free", -1)


def connector_metrics(
    pred: DocumentInput, gt: DocumentInput, config: EvalConfig = EvalConfig()
) -> dict[ElementClass, ConnectorKindRow]:
    """Connection-level scoring for one image.

    A predicted connector is TP iff it is a scored detection match of a gt
    connector of the same kind AND its resolved endpoint shapes map, via the
    shape matching, to the gt connector's endpoints — ordered for arrow (by
    default), unordered for line and double_arrow.  Free endpoints only
    equal Free endpoints.
    """
    for doc in (pred, gt):
        for det in doc.elements:
            if is_connector(det.cls) and det.keypoints is None:
                raise UnresolvedConnections(
                    "connector without keypoints cannot be resolved"
                )
    matching = match_detections(pred, gt, config)
    shape_map: dict[int, int] = {
        p.pred_index: p.gt_index
        for p in matching.pairs
        if is_shape(gt.elements[p.gt_index].cls)
    }

    def resolved(doc: DocumentInput):
        shapes = [
            (i, d.cls, d.bbox) for i, d in enumerate(doc.elements) if is_shape(d.cls)
        ]
        conn_idx = [i for i, d in enumerate(doc.elements) if is_connector(d.cls)]
        edges = resolve_connections(
            shapes, [doc.elements[i] for i in conn_idx], first_edge_id=0
        )
        return {i: e for i, e in zip(conn_idx, edges)}

    pred_edges = resolved(pred)
    gt_edges = resolved(gt)

    rows: dict[ElementClass, ConnectorKindRow] = {}
    for kind in sorted(CONNECTOR_CLASSES, key=lambda c: c.value):
        kind_pairs = [
            p for p in matching.pairs if gt.elements[p.gt_index].cls is kind
        ]
        tp = 0
        for pair in kind_pairs:
            if not pair.scored:
                continue
            pe = pred_edges[pair.pred_index]
            ge = gt_edges[pair.gt_index]
            p_sig = (
                _endpoint_signature(pe.from_binding, shape_map),
                _endpoint_signature(pe.to_binding, shape_map),
            )
            g_sig = (
                _endpoint_signature(ge.from_binding, None),
                _endpoint_signature(ge.to_binding, None),
            )
            ordered = kind is ElementClass.ARROW and config.arrow_ordered
            if not ordered:
                p_sig = tuple(sorted(p_sig))
                g_sig = tuple(sorted(g_sig))
            if p_sig == g_sig:
                tp += 1
        pred_count = sum(1 for d in pred.elements if d.cls is kind)
        gt_count = sum(1 for d in gt.elements if d.cls is kind)
        discarded = (
            sum(1 for p in kind_pairs if not p.scored) if config.lenient else 0
        )
        eff_pred = pred_count - discarded
        eff_gt = gt_count - discarded
        rows[kind] = ConnectorKindRow(
            tp=tp,
            fp=eff_pred - tp,
            fn=eff_gt - tp,
            pred_count=pred_count,
            gt_count=gt_count,
            discarded=discarded,
        )
    return rows


@dataclass
class ConnectorReport:
    """Corpus-level connection scoring: per-kind and pooled averages over
    images, with per-metric N/A exclusion."""

    per_kind: dict[ElementClass, ClassRow]
    overall_precision: Optional[float]
    overall_recall: Optional[float]
    overall_f1: Optional[float]


def connector_corpus_metrics(
    doc_pairs: Sequence[tuple[DocumentInput, DocumentInput]],
    config: EvalConfig = EvalConfig(),
) -> ConnectorReport:
    per_kind_vals: dict[ElementClass, dict[str, list[Optional[float]]]] = {
        k: {"p": [], "r": [], "f": []} for k in CONNECTOR_CLASSES
    }
    counts: dict[ElementClass, list[int]] = {k: [0, 0] for k in CONNECTOR_CLASSES}
    pooled: dict[str, list[Optional[float]]] = {"p": [], "r": [], "f": []}
    for pred, gt in doc_pairs:
        rows = connector_metrics(pred, gt, config)
        tp = sum(r.tp for r in rows.values())
        pred_n = sum(r.pred_count - r.discarded for r in rows.values())
        gt_n = sum(r.gt_count - r.discarded for r in rows.values())
        p = _ratio(tp, pred_n)
        r = _ratio(tp, gt_n)
        if pred_n or gt_n:
            pooled["p"].append(p)
            pooled["r"].append(r)
            pooled["f"].append(_f1(p, r))
        for kind, row in rows.items():
            counts[kind][0] += row.pred_count
            counts[kind][1] += row.gt_count
            if row.pred_count or row.gt_count:
                per_kind_vals[kind]["p"].append(row.precision)
                per_kind_vals[kind]["r"].append(row.recall)
                per_kind_vals[kind]["f"].append(row.f1)
    per_kind = {}
    for kind in sorted(CONNECTOR_CLASSES, key=lambda c: c.value):
        if counts[kind] == [0, 0]:
            continue
        per_kind[kind] = ClassRow(
            precision=_avg(per_kind_vals[kind]["p"]),
            recall=_avg(per_kind_vals[kind]["r"]),
            f1=_avg(per_kind_vals[kind]["f"]),
            pred_count=counts[kind][0],
            gt_count=counts[kind][1],
        )
    return ConnectorReport(
        per_kind=per_kind,
        overall_precision=_avg(pooled["p"]),
        overall_recall=_avg(pooled["r"]),
        overall_f1=_avg(pooled["f"]),
    )


def cer(pred: str, gt: str) -> float:
    """Character error rate: edit distance / max(1, len(gt))."""
    return kernels.levenshtein(pred, gt) / max(1, len(gt))


@dataclass
class CerReport:
    per_pair: list[float]
    total_edits: int
    total_gt_chars: int

    @property
    def corpus_cer(self) -> float:
        return self.total_edits / max(1, self.total_gt_chars)


def corpus_cer(pairs: Sequence[tuple[str, str]]) -> CerReport:
    """CER over many (pred, gt) string pairs; the corpus rate pools edits
    over pooled gt length."""
    per_pair = []
    total_edits = 0
    total_chars = 0
    for p, g in pairs:
        edits = kernels.levenshtein(p, g)
        per_pair.append(edits / max(1, len(g)))
        total_edits += edits
        total_chars += len(g)
    return CerReport(per_pair=per_pair, total_edits=total_edits, total_gt_chars=total_chars)


def text_pairs_from_matching(matching: Matching) -> list[tuple[str, str]]:
    """(pred text, gt text) for matched textblock pairs where both carry
    text."""
    out = []
    for pair in matching.pairs:
        pd = matching.pred.elements[pair.pred_index]
        gd = matching.gt.elements[pair.gt_index]
        if pd.cls is ElementClass.TEXTBLOCK and pd.text is not None and gd.text is not None:
            out.append((pd.text, gd.text))
    return out
