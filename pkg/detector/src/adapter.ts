/**
 * The adapter proper: read an image, run a detector backend, and emit a wire
 * document the downstream pipeline ingests without rejects.
 *
 * The adapter deliberately does no scene-level post-processing — no box
 * suppression, no connection resolution, no text transcription.  Those are
 * downstream responsibilities; this layer only filters by score, maps labels,
 * and normalizes geometry so every emitted element is well-formed.
 */

import { readFileSync } from "node:fs";

import type { BackendInput, DetectorBackend, RawDetection } from "./backend";
import type { AdapterConfig } from "./config";
import { resolveLabel } from "./config";
import { ImageReadError } from "./errors";
import { decodePng, imageSize, isPng } from "./image";
import { StubDetector } from "./stub";
import { TfjsDetector } from "./tfjs";
import type { ElementClassName, WireDocument, WireElement } from "./wire";
import { isConnectorClass, validateDocument } from "./wire";

/** Pick the backend the config asks for: tfjs when a model path is set. */
export async function createBackend(cfg: AdapterConfig): Promise<DetectorBackend> {
  if (cfg.modelPath !== undefined) {
    return TfjsDetector.load(cfg.modelPath, cfg.device);
  }
  return new StubDetector();
}

export function readImage(path: string): BackendInput {
  let bytes: Buffer;
  try {
    bytes = readFileSync(path);
  } catch (err) {
    throw new ImageReadError(`cannot read image ${path}: ${(err as Error).message}`);
  }
  const size = imageSize(bytes); // throws ImageReadError for unknown formats
  const input: BackendInput = { bytes, size };
  if (isPng(bytes)) {
    input.pixels = decodePng(bytes);
  }
  return input;
}

const round2 = (x: number): number => Math.round(x * 100) / 100;

function clampBox(
  bbox: [number, number, number, number],
  width: number,
  height: number,
): [number, number, number, number] {
  const cx = (v: number): number => round2(Math.min(width, Math.max(0, v)));
  const cy = (v: number): number => round2(Math.min(height, Math.max(0, v)));
  const x0 = cx(Math.min(bbox[0], bbox[2]));
  const x1 = cx(Math.max(bbox[0], bbox[2]));
  const y0 = cy(Math.min(bbox[1], bbox[3]));
  const y1 = cy(Math.max(bbox[1], bbox[3]));
  return [x0, y0, x1, y1];
}

function toElement(
  raw: RawDetection,
  cls: ElementClassName,
  cfg: AdapterConfig,
  width: number,
  height: number,
): WireElement {
  const bbox = clampBox(raw.bbox, width, height);
  const element: WireElement = {
    class: cls,
    score: round2(Math.min(1, Math.max(0, raw.score))),
    bbox,
  };
  if (isConnectorClass(cls)) {
    // A connector must carry its two endpoints.  Models without a keypoint
    // head fall back to the box diagonal, which downstream binding can still
    // snap to nearby shapes.
    let [head, tail] = raw.keypoints ?? [
      [bbox[0], bbox[1]] as [number, number],
      [bbox[2], bbox[3]] as [number, number],
    ];
    if (cfg.flipKeypoints.includes(cls)) {
      [head, tail] = [tail, head];
    }
    const cx = (v: number): number => round2(Math.min(width, Math.max(0, v)));
    const cy = (v: number): number => round2(Math.min(height, Math.max(0, v)));
    element.keypoints = [
      [cx(head[0]), cy(head[1])],
      [cx(tail[0]), cy(tail[1])],
    ];
  }
  return element;
}

/**
 * Run detection on one image file and return a validated wire document.
 * The backend may be injected for testing; by default it is chosen from the
 * config.
 */
export async function detectImage(
  imagePath: string,
  cfg: AdapterConfig,
  backend?: DetectorBackend,
): Promise<WireDocument> {
  const resolved = backend ?? (await createBackend(cfg));
  const input = readImage(imagePath);
  const raws = await resolved.detect(input);
  const elements: WireElement[] = [];
  for (const raw of raws) {
    if (raw.score < cfg.scoreThreshold) {
      continue;
    }
    const cls = resolveLabel(cfg, raw.label); // throws ConfigError on gaps
    if (cls === null) {
      continue;
    }
    elements.push(toElement(raw, cls, cfg, input.size.width, input.size.height));
  }
  return validateDocument({
    image: {
      width: input.size.width,
      height: input.size.height,
      path: imagePath,
    },
    elements,
  });
}
