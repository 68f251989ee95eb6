/**
 * Contract implemented by detector backends.  A backend sees the raw image
 * and reports detections in model-native terms; the adapter owns label
 * mapping, score filtering and wire serialization.
 */

import type { DecodedImage, ImageSize } from "./image";

export interface RawDetection {
  /** Model-native class label, resolved via the config's classMap. */
  label: string;
  /** Confidence in [0, 1]. */
  score: number;
  /** Pixel-space [x0, y0, x1, y1] with x0 <= x1 and y0 <= y1. */
  bbox: [number, number, number, number];
  /** Connector endpoints, [head, tail]; absent for shapes and text. */
  keypoints?: [[number, number], [number, number]];
}

export interface BackendInput {
  /** Raw file bytes as read from disk. */
  bytes: Buffer;
  /** Image dimensions in pixels. */
  size: ImageSize;
  /** Decoded samples; present for PNG inputs, absent for JPEG. */
  pixels?: DecodedImage;
}

export interface DetectorBackend {
  readonly name: string;
  detect(input: BackendInput): RawDetection[] | Promise<RawDetection[]>;
}
