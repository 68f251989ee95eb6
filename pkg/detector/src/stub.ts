/**
 * Deterministic stub backend.  It needs no weights: detections are derived
 * from a hash of the image bytes, so the same file always yields the same
 * output and different files yield different but plausible scenes.  A
 * uniformly-colored image (a blank canvas) yields no detections.
 *
 * This backend exists so the end-to-end path — image in, wire document out,
 * consumed by the downstream pipeline — can be exercised and tested without
 * shipping model weights.
 */

import type { BackendInput, DetectorBackend, RawDetection } from "./backend";
import { isUniform } from "./image";
import { CONNECTOR_CLASSES, SHAPE_CLASSES, TEXT_CLASS } from "./wire";

/** FNV-1a 32-bit hash over a byte buffer. */
export function fnv1a(bytes: Buffer): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < bytes.length; i++) {
    hash ^= bytes[i] as number;
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

/** mulberry32: tiny deterministic PRNG over a 32-bit seed. */
function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function round2(x: number): number {
  return Math.round(x * 100) / 100;
}

export class StubDetector implements DetectorBackend {
  readonly name = "stub";

  detect(input: BackendInput): RawDetection[] {
    if (input.pixels !== undefined && isUniform(input.pixels)) {
      return [];
    }
    const { width, height } = input.size;
    const rand = mulberry32(fnv1a(input.bytes) ^ Math.imul(width, 2654435761) ^ height);
    const pick = <T>(items: readonly T[]): T =>
      items[Math.floor(rand() * items.length)] as T;

    const nShapes = 2 + Math.floor(rand() * 3); // 2..4
    const nConnectors = 1 + Math.floor(rand() * Math.min(3, nShapes)); // 1..3
    const nTexts = Math.floor(rand() * 3); // 0..2

    const detections: RawDetection[] = [];
    const cols = 2;
    const rows = Math.ceil(nShapes / cols);
    const cellW = width / cols;
    const cellH = height / rows;
    const shapeBoxes: [number, number, number, number][] = [];
    for (let i = 0; i < nShapes; i++) {
      const cx = (i % cols) * cellW;
      const cy = Math.floor(i / cols) * cellH;
      const insetX = cellW * (0.1 + 0.15 * rand());
      const insetY = cellH * (0.1 + 0.15 * rand());
      const bbox: [number, number, number, number] = [
        round2(cx + insetX),
        round2(cy + insetY),
        round2(cx + cellW - insetX),
        round2(cy + cellH - insetY),
      ];
      shapeBoxes.push(bbox);
      detections.push({
        label: pick(SHAPE_CLASSES),
        // Keep the first shape confidently above the default threshold so a
        // non-blank image always yields at least one surviving detection.
        score: round2(i === 0 ? 0.8 + 0.19 * rand() : 0.3 + 0.69 * rand()),
        bbox,
      });
    }

    for (let i = 0; i < nConnectors; i++) {
      const a = shapeBoxes[Math.floor(rand() * shapeBoxes.length)] as [
        number, number, number, number,
      ];
      let b = shapeBoxes[Math.floor(rand() * shapeBoxes.length)] as [
        number, number, number, number,
      ];
      if (shapeBoxes.length > 1 && b === a) {
        b = shapeBoxes[(shapeBoxes.indexOf(a) + 1) % shapeBoxes.length] as [
          number, number, number, number,
        ];
      }
      const head: [number, number] = [
        round2((a[0] + a[2]) / 2),
        round2((a[1] + a[3]) / 2),
      ];
      const tail: [number, number] = [
        round2((b[0] + b[2]) / 2),
        round2((b[1] + b[3]) / 2),
      ];
      // Pad so an axis-aligned connector still has a positive-area box.
      const bbox: [number, number, number, number] = [
        round2(Math.max(0, Math.min(head[0], tail[0]) - 2)),
        round2(Math.max(0, Math.min(head[1], tail[1]) - 2)),
        round2(Math.min(width, Math.max(head[0], tail[0]) + 2)),
        round2(Math.min(height, Math.max(head[1], tail[1]) + 2)),
      ];
      detections.push({
        label: pick(CONNECTOR_CLASSES),
        score: round2(i === 0 ? 0.8 + 0.19 * rand() : 0.3 + 0.69 * rand()),
        bbox,
        keypoints: [head, tail],
      });
    }

    for (let i = 0; i < nTexts; i++) {
      const host = shapeBoxes[Math.floor(rand() * shapeBoxes.length)] as [
        number, number, number, number,
      ];
      const padX = (host[2] - host[0]) * 0.25;
      const padY = (host[3] - host[1]) * 0.3;
      detections.push({
        label: TEXT_CLASS,
        score: round2(0.3 + 0.69 * rand()),
        bbox: [
          round2(host[0] + padX),
          round2(host[1] + padY),
          round2(host[2] - padX),
          round2(host[3] - padY),
        ],
      });
    }

    return detections;
  }
}
