"""flowmind: convert hand-drawn flowchart/mind-map detections into editable
digital diagrams.

The package turns per-element detector output (boxes, classes, scores,
connector keypoints) into a clean diagram document — duplicate suppression,
connector-to-shape binding, text association, optional auto-layout — and
exports SVG, draw.io XML, and PowerPoint files.  It also ships the evaluation
metrics and a synthetic corpus generator used to exercise the whole pipeline.
"""

__version__ = "0.1.0"
