"""Seeded synthetic diagram generator.

Produces paired (ground truth, perturbed detections) documents: shapes on a
jittered grid, connectors between adjacent occupied cells with keypoints on
the true anchor positions, text labels inside shapes, and the occasional
standalone text in an empty cell.  The perturbed copy applies configurable
noise (box jitter, drops, duplicates, class confusion, keypoint jitter); a
zero-noise config reproduces the ground truth exactly.

Randomness is counter-based: every draw comes from a generator keyed on
(seed, image index, purpose, element index), so corpora are reproducible
across platforms and generation order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from flowmind.connect import keypoint_to_shape_distance
from flowmind.geometry import (
    CornerBox,
    Detection,
    ElementClass,
    KeypointPair,
    SHAPE_CLASSES,
)
from flowmind.ingest import DocumentInput, serialize_document


class InvalidConfig(ValueError):
    """Synth configuration out of range."""


@dataclass(frozen=True)
class Perturbation:
    """Detection-level noise: Gaussian box/keypoint jitter (pixel sigmas)
    and per-element drop/duplicate/class-confusion probabilities."""

    bbox_jitter_px: float = 0.0
    drop_prob: float = 0.0
    duplicate_prob: float = 0.0
    class_confusion_prob: float = 0.0
    keypoint_jitter_px: float = 0.0

    def validate(self) -> None:
        for name in ("bbox_jitter_px", "keypoint_jitter_px"):
            if getattr(self, name) < 0:
                raise InvalidConfig(f"{name} must be >= 0")
        for name in ("drop_prob", "duplicate_prob", "class_confusion_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1], got {v}")

    @property
    def is_zero(self) -> bool:
        return (
            self.bbox_jitter_px == 0.0
            and self.drop_prob == 0.0
            and self.duplicate_prob == 0.0
            and self.class_confusion_prob == 0.0
            and self.keypoint_jitter_px == 0.0
        )


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_images: int = 10
    grid: tuple[int, int] = (3, 4)  # rows, cols
    shape_class_weights: Optional[dict[str, float]] = None
    connector_density: float = 0.6
    perturbation: Perturbation = Perturbation()

    def validate(self) -> None:
        if self.n_images < 0:
            raise InvalidConfig("n_images must be >= 0")
        if self.grid[0] < 1 or self.grid[1] < 1:
            raise InvalidConfig("grid must be at least 1x1")
        if not 0.0 <= self.connector_density <= 1.0:
            raise InvalidConfig("connector_density must be in [0, 1]")
        if self.shape_class_weights is not None:
            for name, w in self.shape_class_weights.items():
                if ElementClass(name) not in SHAPE_CLASSES:
                    raise InvalidConfig(f"{name} is not a shape class")
                if w < 0:
                    raise InvalidConfig("class weights must be >= 0")
            if not any(w > 0 for w in self.shape_class_weights.values()):
                raise InvalidConfig("at least one positive class weight required")
        self.perturbation.validate()


CELL_W = 320.0
CELL_H = 260.0
OCCUPANCY_PROB = 0.75
LABEL_PROB = 0.8
FREE_TEXT_PROB = 0.25
CENTER_JITTER_PX = 6.0
# Two well-separated size presets so layout clustering has stable targets.
SIZE_PRESETS = ((96.0, 57.6), (211.2, 124.8))
CONNECTOR_KINDS = (
    (ElementClass.ARROW, 0.6),
    (ElementClass.LINE, 0.25),
    (ElementClass.DOUBLE_ARROW, 0.15),
)
VOCABULARY = (
    "start", "end", "init", "load", "parse", "check", "merge", "save",
    "loop", "done", "input", "output", "plan", "test", "run", "stop",
)

# Purpose codes for keyed random streams.
_P_OCCUPANCY = 0
_P_CLASS = 1
_P_SIZE = 2
_P_TEXT = 3
_P_CONNECT = 4
_P_PERTURB = 5
_P_DUPLICATE = 6
_P_SPLIT = 7


def _rng(seed: int, image: int, purpose: int, element: int = 0) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([seed, image, purpose, element]))
    )


def _weighted_choice(rng: np.random.Generator, items: Sequence, weights: Sequence[float]):
    total = float(sum(weights))
    u = rng.random() * total
    acc = 0.0
    for item, w in zip(items, weights):
        acc += w
        if u < acc:
            return item
    return items[-1]


def _shape_classes_and_weights(
    cfg: SynthConfig,
) -> tuple[list[ElementClass], list[float]]:
    classes = sorted(SHAPE_CLASSES, key=lambda c: c.value)
    if cfg.shape_class_weights is None:
        return classes, [1.0] * len(classes)
    weights = [cfg.shape_class_weights.get(c.value, 0.0) for c in classes]
    return classes, weights


def _generate_ground_truth(cfg: SynthConfig, image: int) -> DocumentInput:
    rows, cols = cfg.grid
    width = int(cols * CELL_W)
    height = int(rows * CELL_H)
    classes, weights = _shape_classes_and_weights(cfg)

    occ_rng = _rng(cfg.seed, image, _P_OCCUPANCY)
    occupied: list[tuple[int, int]] = []
    for r in range(rows):
        for c in range(cols):
            if occ_rng.random() < OCCUPANCY_PROB:
                occupied.append((r, c))
    if not occupied:
        occupied.append((0, 0))

    shapes: list[Detection] = []
    cell_shape: dict[tuple[int, int], int] = {}
    for idx, (r, c) in enumerate(occupied):
        cls_rng = _rng(cfg.seed, image, _P_CLASS, idx)
        cls = _weighted_choice(cls_rng, classes, weights)
        size_rng = _rng(cfg.seed, image, _P_SIZE, idx)
        w, h = SIZE_PRESETS[int(size_rng.integers(0, len(SIZE_PRESETS)))]
        jx = (size_rng.random() * 2.0 - 1.0) * CENTER_JITTER_PX
        jy = (size_rng.random() * 2.0 - 1.0) * CENTER_JITTER_PX
        xc = (c + 0.5) * CELL_W + jx
        yc = (r + 0.5) * CELL_H + jy
        bbox = CornerBox(xc - w / 2, yc - h / 2, xc + w / 2, yc + h / 2)
        cell_shape[(r, c)] = len(shapes)
        shapes.append(Detection(cls=cls, bbox=bbox, score=1.0))

    connectors: list[Detection] = []
    pairs: list[tuple[tuple[int, int], tuple[int, int]]] = []
    for r, c in occupied:
        for dr, dc in ((0, 1), (1, 0)):
            nb = (r + dr, c + dc)
            if nb in cell_shape:
                pairs.append(((r, c), nb))
    for pi, (cell_a, cell_b) in enumerate(pairs):
        conn_rng = _rng(cfg.seed, image, _P_CONNECT, pi)
        if conn_rng.random() >= cfg.connector_density:
            continue
        kind = _weighted_choice(
            conn_rng, [k for k, _ in CONNECTOR_KINDS], [w for _, w in CONNECTOR_KINDS]
        )
        ia, ib = cell_shape[cell_a], cell_shape[cell_b]
        da, db = shapes[ia], shapes[ib]
        _, anchor_a = keypoint_to_shape_distance(db.bbox.center, da.cls, da.bbox)
        _, anchor_b = keypoint_to_shape_distance(da.bbox.center, db.cls, db.bbox)
        p_from = anchor_a.position
        p_to = anchor_b.position
        pad = 6.0
        bbox = CornerBox(
            max(0.0, min(p_from[0], p_to[0]) - pad),
            max(0.0, min(p_from[1], p_to[1]) - pad),
            min(float(width), max(p_from[0], p_to[0]) + pad),
            min(float(height), max(p_from[1], p_to[1]) + pad),
        )
        connectors.append(
            Detection(
                cls=kind,
                bbox=bbox,
                score=1.0,
                keypoints=KeypointPair(p_from, p_to),
            )
        )

    texts: list[Detection] = []
    for idx, (r, c) in enumerate(occupied):
        text_rng = _rng(cfg.seed, image, _P_TEXT, idx)
        if text_rng.random() >= LABEL_PROB:
            continue
        det = shapes[cell_shape[(r, c)]]
        xc, yc = det.bbox.center
        tw = det.bbox.width * 0.7
        th = min(26.0, det.bbox.height * 0.45)
        word = VOCABULARY[int(text_rng.integers(0, len(VOCABULARY)))]
        texts.append(
            Detection(
                cls=ElementClass.TEXTBLOCK,
                bbox=CornerBox(xc - tw / 2, yc - th / 2, xc + tw / 2, yc + th / 2),
                score=1.0,
                text=word,
            )
        )
    empty_cells = [
        (r, c) for r in range(rows) for c in range(cols) if (r, c) not in cell_shape
    ]
    for idx, (r, c) in enumerate(empty_cells):
        text_rng = _rng(cfg.seed, image, _P_TEXT, len(occupied) + idx)
        if text_rng.random() >= FREE_TEXT_PROB:
            continue
        xc = (c + 0.5) * CELL_W
        yc = (r + 0.5) * CELL_H
        word = VOCABULARY[int(text_rng.integers(0, len(VOCABULARY)))]
        texts.append(
            Detection(
                cls=ElementClass.TEXTBLOCK,
                bbox=CornerBox(xc - 60.0, yc - 15.0, xc + 60.0, yc + 15.0),
                score=1.0,
                text=word,
            )
        )

    return DocumentInput(
        image_width=width,
        image_height=height,
        image_path=None,
        elements=tuple(shapes + connectors + texts),
    )


def _confused_class(cls: ElementClass, rng: np.random.Generator) -> ElementClass:
    if cls in SHAPE_CLASSES:
        pool = [c for c in sorted(SHAPE_CLASSES, key=lambda x: x.value) if c is not cls]
    elif cls in (ElementClass.ARROW, ElementClass.DOUBLE_ARROW, ElementClass.LINE):
        pool = [
            c
            for c in (ElementClass.ARROW, ElementClass.DOUBLE_ARROW, ElementClass.LINE)
            if c is not cls
        ]
    else:
        return cls
    return pool[int(rng.integers(0, len(pool)))]


def _perturb_element(
    det: Detection, rng: np.random.Generator, pert: Perturbation
) -> Optional[list[Detection]]:
    """None = dropped; otherwise the perturbed element plus any duplicate."""
    if pert.drop_prob > 0 and rng.random() < pert.drop_prob:
        return None
    cls = det.cls
    if pert.class_confusion_prob > 0 and rng.random() < pert.class_confusion_prob:
        cls = _confused_class(cls, rng)
    bbox = det.bbox
    if pert.bbox_jitter_px > 0:
        d = rng.normal(0.0, pert.bbox_jitter_px, size=4)
        x0, y0 = bbox.x0 + d[0], bbox.y0 + d[1]
        x1, y1 = bbox.x1 + d[2], bbox.y1 + d[3]
        if x0 > x1:
            x0, x1 = x1, x0
        if y0 > y1:
            y0, y1 = y1, y0
        bbox = CornerBox(x0, y0, x1, y1)
    keypoints = det.keypoints
    if keypoints is not None and pert.keypoint_jitter_px > 0:
        d = rng.normal(0.0, pert.keypoint_jitter_px, size=4)
        keypoints = KeypointPair(
            (keypoints.from_xy[0] + d[0], keypoints.from_xy[1] + d[1]),
            (keypoints.to_xy[0] + d[2], keypoints.to_xy[1] + d[3]),
        )
    out = [
        Detection(cls=cls, bbox=bbox, score=det.score, keypoints=keypoints, text=det.text)
    ]
    if pert.duplicate_prob > 0 and rng.random() < pert.duplicate_prob:
        sigma = max(pert.bbox_jitter_px * 2.0, 2.0)
        d = rng.normal(0.0, sigma, size=4)
        x0, y0 = bbox.x0 + d[0], bbox.y0 + d[1]
        x1, y1 = bbox.x1 + d[2], bbox.y1 + d[3]
        if x0 > x1:
            x0, x1 = x1, x0
        if y0 > y1:
            y0, y1 = y1, y0
        score = 0.3 + rng.random() * 0.6
        out.append(
            Detection(
                cls=cls,
                bbox=CornerBox(x0, y0, x1, y1),
                score=score,
                keypoints=keypoints,
                text=det.text,
            )
        )
    return out


def _perturb_document(
    cfg: SynthConfig, image: int, gt: DocumentInput
) -> DocumentInput:
    if cfg.perturbation.is_zero:
        return gt
    elements: list[Detection] = []
    for idx, det in enumerate(gt.elements):
        rng = _rng(cfg.seed, image, _P_PERTURB, idx)
        result = _perturb_element(det, rng, cfg.perturbation)
        if result is not None:
            elements.extend(result)
    return DocumentInput(
        image_width=gt.image_width,
        image_height=gt.image_height,
        image_path=gt.image_path,
        elements=tuple(elements),
    )


def generate(cfg: SynthConfig) -> list[tuple[DocumentInput, DocumentInput]]:
    """All (ground truth, perturbed) pairs for the configured corpus."""
    cfg.validate()
    out = []
    for image in range(cfg.n_images):
        gt = _generate_ground_truth(cfg, image)
        det = _perturb_document(cfg, image, gt)
        out.append((gt, det))
    return out


def _splits(cfg: SynthConfig) -> list[str]:
    """Deterministic 60/20/20 train/val/test assignment by shuffled image
    index."""
    n = cfg.n_images
    order = list(_rng(cfg.seed, 0, _P_SPLIT).permutation(n))
    n_train = int(n * 0.6)
    n_val = int(n * 0.2)
    names = [""] * n
    for pos, img in enumerate(order):
        if pos < n_train:
            names[img] = "train"
        elif pos < n_train + n_val:
            names[img] = "val"
        else:
            names[img] = "test"
    return names


def config_to_dict(cfg: SynthConfig) -> dict:
    return {
        "seed": cfg.seed,
        "n_images": cfg.n_images,
        "grid": list(cfg.grid),
        "shape_class_weights": cfg.shape_class_weights,
        "connector_density": cfg.connector_density,
        "perturbation": {
            "bbox_jitter_px": cfg.perturbation.bbox_jitter_px,
            "drop_prob": cfg.perturbation.drop_prob,
            "duplicate_prob": cfg.perturbation.duplicate_prob,
            "class_confusion_prob": cfg.perturbation.class_confusion_prob,
            "keypoint_jitter_px": cfg.perturbation.keypoint_jitter_px,
        },
    }


def write_corpus(cfg: SynthConfig, out_dir: str) -> list[str]:
    """Write `<stem>.gt` / `<stem>.det` pairs and a manifest (last, as the
    completion marker).  Returns the stems."""
    cfg.validate()
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    stems = []
    splits = _splits(cfg)
    for image, (gt, det) in enumerate(generate(cfg)):
        stem = f"img{image:04d}"
        stems.append(stem)
        (directory / f"{stem}.gt").write_text(
            serialize_document(gt, include_scores=False), encoding="utf-8"
        )
        (directory / f"{stem}.det").write_text(
            serialize_document(det), encoding="utf-8"
        )
    manifest = {
        "config": config_to_dict(cfg),
        "images": [
            {"stem": stem, "split": splits[i]} for i, stem in enumerate(stems)
        ],
    }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return stems
