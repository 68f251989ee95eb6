"""Kernel backend selection.

Imports the compiled extension when available and not disabled, otherwise the
pure-Python/numpy fallback.  Set ``FLOWMIND_PURE_PYTHON=1`` to force the
fallback.  Both backends are contractually bitwise-identical; ``BACKEND``
reports which one is active ("compiled" or "python").
"""

from __future__ import annotations

import os

if os.environ.get("FLOWMIND_PURE_PYTHON", "") not in ("", "0"):
    from flowmind import _kernels_py as _impl
else:
    try:
        from flowmind import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from flowmind import _kernels_py as _impl  # type: ignore[no-redef]

BACKEND: str = _impl.BACKEND

box_iou = _impl.box_iou
pairwise_iou = _impl.pairwise_iou
greedy_suppress = _impl.greedy_suppress
point_segment = _impl.point_segment
polygon_nearest = _impl.polygon_nearest
nearest_point = _impl.nearest_point
levenshtein = _impl.levenshtein
assign_nearest = _impl.assign_nearest

__all__ = [
    "BACKEND",
    "box_iou",
    "pairwise_iou",
    "greedy_suppress",
    "point_segment",
    "polygon_nearest",
    "nearest_point",
    "levenshtein",
    "assign_nearest",
]
