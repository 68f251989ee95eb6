/**
 * TensorFlow.js graph-model backend.  Loads a converted detection model from
 * a local directory (model.json plus weight shards) and runs it on decoded
 * image pixels.
 *
 * Expected model signature:
 *   input   [1, H, W, 3]   float32 RGB in [0, 1]
 *   outputs boxes  [N, 4]  relative [x0, y0, x1, y1]
 *           scores [N]     confidence in [0, 1]
 *           classes [N]    integer label indices
 *           keypoints [N, 4] optional, relative [hx, hy, tx, ty]
 *
 * Label names for the class indices are taken from the model.json
 * userDefinedMetadata.classNames array when present; otherwise indices map to
 * "class_<i>" and the adapter config's classMap must cover them.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";

import * as tf from "@tensorflow/tfjs";

import type { BackendInput, DetectorBackend, RawDetection } from "./backend";
import { ImageReadError, ModelLoadError } from "./errors";
import type { DecodedImage } from "./image";

interface WeightsManifestGroup {
  paths: string[];
  weights: tf.io.WeightsManifestEntry[];
}

function fileIoHandler(modelJsonPath: string): tf.io.IOHandler {
  return {
    load: async (): Promise<tf.io.ModelArtifacts> => {
      const text = readFileSync(modelJsonPath, "utf-8");
      const modelJson = JSON.parse(text) as {
        modelTopology: object;
        weightsManifest: WeightsManifestGroup[];
        format?: string;
        generatedBy?: string;
        convertedBy?: string;
        signature?: {};
        userDefinedMetadata?: {};
      };
      if (modelJson.modelTopology === undefined) {
        throw new Error("model.json has no modelTopology");
      }
      const dir = dirname(modelJsonPath);
      const manifest = modelJson.weightsManifest ?? [];
      const weightSpecs = manifest.flatMap((group) => group.weights);
      const shards = manifest.flatMap((group) =>
        group.paths.map((p) => readFileSync(join(dir, p))),
      );
      const weightData = Buffer.concat(shards);
      return {
        modelTopology: modelJson.modelTopology,
        weightSpecs,
        weightData: weightData.buffer.slice(
          weightData.byteOffset,
          weightData.byteOffset + weightData.byteLength,
        ),
        format: modelJson.format,
        generatedBy: modelJson.generatedBy,
        convertedBy: modelJson.convertedBy,
        signature: modelJson.signature,
        userDefinedMetadata: modelJson.userDefinedMetadata,
      };
    },
  };
}

function readClassNames(modelJsonPath: string): string[] {
  try {
    const modelJson = JSON.parse(readFileSync(modelJsonPath, "utf-8")) as {
      userDefinedMetadata?: { classNames?: unknown };
    };
    const names = modelJson.userDefinedMetadata?.classNames;
    if (Array.isArray(names) && names.every((n) => typeof n === "string")) {
      return names as string[];
    }
  } catch {
    // loadModel already surfaced the real failure; label fallback is fine.
  }
  return [];
}

function pixelsToTensor(image: DecodedImage): tf.Tensor4D {
  const { width, height, channels, data } = image;
  const rgb = new Float32Array(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    const base = i * channels;
    if (channels >= 3) {
      rgb[i * 3] = (data[base] as number) / 255;
      rgb[i * 3 + 1] = (data[base + 1] as number) / 255;
      rgb[i * 3 + 2] = (data[base + 2] as number) / 255;
    } else {
      const gray = (data[base] as number) / 255;
      rgb[i * 3] = gray;
      rgb[i * 3 + 1] = gray;
      rgb[i * 3 + 2] = gray;
    }
  }
  return tf.tensor4d(rgb, [1, height, width, 3]);
}

export class TfjsDetector implements DetectorBackend {
  readonly name = "tfjs";

  private constructor(
    private readonly model: tf.GraphModel,
    private readonly classNames: string[],
  ) {}

  /**
   * Load a graph model from a directory containing model.json (or from the
   * model.json path itself).  Throws ModelLoadError on any failure.
   */
  static async load(modelPath: string, device: "cpu" | "gpu"): Promise<TfjsDetector> {
    const modelJsonPath = modelPath.endsWith(".json")
      ? modelPath
      : join(modelPath, "model.json");
    try {
      await tf.setBackend(device === "gpu" ? "webgl" : "cpu");
    } catch {
      await tf.setBackend("cpu");
    }
    let model: tf.GraphModel;
    try {
      model = await tf.loadGraphModel(fileIoHandler(modelJsonPath));
    } catch (err) {
      throw new ModelLoadError(
        `cannot load model from ${modelPath}: ${(err as Error).message}`,
      );
    }
    return new TfjsDetector(model, readClassNames(modelJsonPath));
  }

  async detect(input: BackendInput): Promise<RawDetection[]> {
    if (input.pixels === undefined) {
      throw new ImageReadError(
        "model backend needs decodable pixels; provide a PNG input",
      );
    }
    const { width, height } = input.size;
    const tensor = pixelsToTensor(input.pixels);
    try {
      const outputs = await this.run(tensor);
      return this.toDetections(outputs, width, height);
    } finally {
      tensor.dispose();
    }
  }

  private async run(tensor: tf.Tensor4D): Promise<Map<string, Float32Array>> {
    const raw = await this.model.executeAsync(tensor);
    const tensors = Array.isArray(raw) ? raw : [raw];
    const names = this.model.outputNodes;
    const byRole = new Map<string, Float32Array>();
    const roleOf = (name: string, index: number): string => {
      const lower = name.toLowerCase();
      if (lower.includes("keypoint")) return "keypoints";
      if (lower.includes("box")) return "boxes";
      if (lower.includes("score")) return "scores";
      if (lower.includes("class") || lower.includes("label")) return "classes";
      return ["boxes", "scores", "classes", "keypoints"][index] ?? `extra_${index}`;
    };
    for (let i = 0; i < tensors.length; i++) {
      const t = tensors[i] as tf.Tensor;
      const name = typeof names[i] === "string" ? (names[i] as string) : `output_${i}`;
      byRole.set(roleOf(name, i), new Float32Array(await t.data()));
      t.dispose();
    }
    return byRole;
  }

  private toDetections(
    outputs: Map<string, Float32Array>,
    width: number,
    height: number,
  ): RawDetection[] {
    const boxes = outputs.get("boxes");
    const scores = outputs.get("scores");
    const classes = outputs.get("classes");
    if (boxes === undefined || scores === undefined || classes === undefined) {
      throw new ModelLoadError(
        "model outputs do not include boxes, scores and classes",
      );
    }
    const keypoints = outputs.get("keypoints");
    const n = scores.length;
    const clampX = (x: number): number => Math.min(width, Math.max(0, x * width));
    const clampY = (y: number): number => Math.min(height, Math.max(0, y * height));
    const detections: RawDetection[] = [];
    for (let i = 0; i < n; i++) {
      const x0 = clampX(boxes[i * 4] as number);
      const y0 = clampY(boxes[i * 4 + 1] as number);
      const x1 = clampX(boxes[i * 4 + 2] as number);
      const y1 = clampY(boxes[i * 4 + 3] as number);
      const classIdx = Math.round(classes[i] as number);
      const detection: RawDetection = {
        label: this.classNames[classIdx] ?? `class_${classIdx}`,
        score: Math.min(1, Math.max(0, scores[i] as number)),
        bbox: [Math.min(x0, x1), Math.min(y0, y1), Math.max(x0, x1), Math.max(y0, y1)],
      };
      if (keypoints !== undefined && keypoints.length >= (i + 1) * 4) {
        detection.keypoints = [
          [clampX(keypoints[i * 4] as number), clampY(keypoints[i * 4 + 1] as number)],
          [clampX(keypoints[i * 4 + 2] as number), clampY(keypoints[i * 4 + 3] as number)],
        ];
      }
      detections.push(detection);
    }
    return detections;
  }
}
