"""Benchmark the compiled kernels against the pure-Python fallback.

Runs each hot kernel on a representative workload with both backends,
verifies they agree bitwise on that workload, and prints a timing table.

Usage::

    python benchmarks/bench_kernels.py [--repeats N] [--scale F]
"""

from __future__ import annotations

import argparse
import random
import string
import time

import numpy as np

from flowmind import _kernels_py

try:
    from flowmind import _kernels
except ImportError:
    _kernels = None


def random_boxes(rng: np.random.Generator, n: int) -> np.ndarray:
    xy = rng.uniform(0, 500, size=(n, 2))
    wh = rng.uniform(1, 80, size=(n, 2))
    return np.hstack([xy, xy + wh])


def bench(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def workloads(scale: float):
    rng = np.random.default_rng(8)
    rnd = random.Random(8)

    boxes_a = random_boxes(rng, int(400 * scale))
    boxes_b = random_boxes(rng, int(400 * scale))
    nms_boxes = random_boxes(rng, int(1500 * scale))
    seg_points = rng.uniform(-50, 550, size=(int(20000 * scale), 2))
    hexagon = np.array(
        [(25, 0), (75, 0), (100, 50), (75, 100), (25, 100), (0, 50)], dtype=float
    )
    candidates = rng.uniform(0, 100, size=(8, 2))
    words = [
        "".join(rnd.choice(string.ascii_lowercase + " ") for _ in range(150))
        for _ in range(int(40 * scale) * 2)
    ]
    points = rng.uniform(0, 100, size=(int(5000 * scale), 2))
    centroids = rng.uniform(0, 100, size=(12, 2))

    def run_pairwise(mod):
        return mod.pairwise_iou(boxes_a, boxes_b)

    def run_suppress(mod):
        return mod.greedy_suppress(nms_boxes, 0.5)

    def run_segment(mod):
        acc = 0.0
        for px, py in seg_points:
            acc += mod.point_segment(px, py, 10.0, 10.0, 400.0, 300.0)[0]
        return acc

    def run_polygon(mod):
        acc = 0.0
        for px, py in seg_points:
            acc += mod.polygon_nearest(px, py, hexagon)[0]
        return acc

    def run_nearest(mod):
        acc = 0.0
        for px, py in seg_points:
            acc += mod.nearest_point(px, py, candidates)[0]
        return acc

    def run_levenshtein(mod):
        return [
            mod.levenshtein(words[i], words[i + 1])
            for i in range(0, len(words), 2)
        ]

    def run_assign(mod):
        return mod.assign_nearest(points, centroids)

    return [
        (f"pairwise_iou      {len(boxes_a)}x{len(boxes_b)} boxes", run_pairwise),
        (f"greedy_suppress   {len(nms_boxes)} boxes", run_suppress),
        (f"point_segment     {len(seg_points)} points", run_segment),
        (f"polygon_nearest   {len(seg_points)} points, hexagon", run_polygon),
        (f"nearest_point     {len(seg_points)} points, 8 sites", run_nearest),
        (f"levenshtein       {len(words) // 2} pairs of 150 chars", run_levenshtein),
        (f"assign_nearest    {len(points)} points, 12 centroids", run_assign),
    ]


def agrees(a, b) -> bool:
    if isinstance(a, tuple):
        return all(agrees(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, np.asarray(b))
    if isinstance(a, list):
        return a == b
    return a == b


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="best-of timing runs")
    parser.add_argument(
        "--scale", type=float, default=1.0, help="workload size multiplier"
    )
    args = parser.parse_args()

    if _kernels is None:
        print("compiled backend not built; timing the pure-Python backend only\n")
    header = f"{'kernel / workload':<45}{'python':>10}{'compiled':>10}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, runner in workloads(args.scale):
        t_py = bench(lambda: runner(_kernels_py), args.repeats)
        if _kernels is None:
            print(f"{name:<45}{t_py * 1e3:>8.2f}ms{'-':>10}{'-':>9}")
            continue
        if not agrees(runner(_kernels_py), runner(_kernels)):
            raise SystemExit(f"backend disagreement on {name}")
        t_c = bench(lambda: runner(_kernels), args.repeats)
        print(
            f"{name:<45}{t_py * 1e3:>8.2f}ms{t_c * 1e3:>8.2f}ms"
            f"{t_py / t_c:>8.1f}x"
        )


if __name__ == "__main__":
    main()
