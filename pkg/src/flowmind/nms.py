"""Cross-class non-maximum suppression.

Hand-drawn shapes are easily detected twice under two plausible classes (a
wobbly rectangle also scores as a parallelogram), so suppression deliberately
ignores class membership: any lower-scored box overlapping a kept box with IoU
strictly above the threshold is dropped, whatever its class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from flowmind import kernels
from flowmind.geometry import Detection, is_text


@dataclass(frozen=True)
class NmsConfig:
    """iou_threshold in (0, 1]; exempt_text removes textblocks from
    suppression entirely (they neither suppress nor get suppressed)."""

    iou_threshold: float = 0.5
    exempt_text: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError(
                f"iou_threshold must be in (0, 1], got {self.iou_threshold}"
            )


def sort_for_nms(elements: Sequence[Detection]) -> list[int]:
    """Indices ordered by score descending; ties keep the input order."""
    return sorted(range(len(elements)), key=lambda i: -elements[i].score)


def cross_class_nms(
    elements: Sequence[Detection], config: NmsConfig = NmsConfig()
) -> list[Detection]:
    """Greedy suppression over all classes jointly.

    The output is the score-descending survivor list: a subsequence of the
    score-sorted input.  Equal-scored overlapping elements keep the earlier
    one in input order.
    """
    order = sort_for_nms(elements)
    if not order:
        return []
    boxes = np.array(
        [elements[i].bbox.as_tuple() for i in order], dtype=np.float64
    )
    if not config.exempt_text:
        keep = kernels.greedy_suppress(boxes, config.iou_threshold)
        return [elements[i] for i, k in zip(order, keep) if k]

    text_mask = [is_text(elements[i].cls) for i in order]
    iou = kernels.pairwise_iou(boxes, boxes)
    n = len(order)
    keep = [True] * n
    for i in range(n):
        if not keep[i] or text_mask[i]:
            continue
        for j in range(i + 1, n):
            if keep[j] and not text_mask[j] and iou[i, j] > config.iou_threshold:
                keep[j] = False
    return [elements[i] for i, k in zip(order, keep) if k]
