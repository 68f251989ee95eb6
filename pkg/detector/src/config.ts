/**
 * Adapter configuration: which model to run, how confident a detection must
 * be to survive, and how the model's native label set maps onto the wire
 * vocabulary understood by the downstream pipeline.
 */

import { readFileSync } from "node:fs";

import { z } from "zod";

import { ELEMENT_CLASSES, isConnectorClass } from "./wire";

const classTargetSchema = z.union([
  z.enum(ELEMENT_CLASSES),
  z.literal("ignore"),
]);

export const adapterConfigSchema = z
  .object({
    /**
     * Path to a TensorFlow.js graph model directory (containing model.json).
     * When omitted the deterministic stub backend is used, which needs no
     * weights and exists for integration testing.
     */
    modelPath: z.string().min(1).optional(),
    /** Detections scoring below this are dropped before serialization. */
    scoreThreshold: z.number().min(0).max(1).default(0.5),
    /** Execution device hint passed to the model backend. */
    device: z.enum(["cpu", "gpu"]).default("cpu"),
    /**
     * Maps each label the model emits to a wire class, or to "ignore" to
     * drop that label entirely.  Must cover every label the backend reports.
     */
    classMap: z.record(z.string(), classTargetSchema).default({}),
    /**
     * Wire classes whose two connector keypoints should be swapped.  Some
     * models are trained with the opposite head/tail convention; listing a
     * connector class here flips its endpoint order.
     */
    flipKeypoints: z.array(z.enum(ELEMENT_CLASSES)).default([]),
  })
  .strict()
  .superRefine((cfg, ctx) => {
    for (const cls of cfg.flipKeypoints) {
      if (!isConnectorClass(cls)) {
        ctx.addIssue({
          code: z.ZodIssueCode.custom,
          message: `flipKeypoints entry "${cls}" is not a connector class`,
          path: ["flipKeypoints"],
        });
      }
    }
  });

export type AdapterConfig = z.infer<typeof adapterConfigSchema>;

export class ConfigError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConfigError";
  }
}

/** Parse and validate a plain object into an AdapterConfig. */
export function parseConfig(data: unknown): AdapterConfig {
  const result = adapterConfigSchema.safeParse(data);
  if (!result.success) {
    const issue = result.error.issues[0];
    const where = issue && issue.path.length > 0 ? `${issue.path.join(".")}: ` : "";
    throw new ConfigError(`invalid adapter config: ${where}${issue?.message ?? "unknown error"}`);
  }
  return result.data;
}

/** Load an AdapterConfig from a JSON file. */
export function loadConfig(path: string): AdapterConfig {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    throw new ConfigError(`cannot read config file ${path}: ${(err as Error).message}`);
  }
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (err) {
    throw new ConfigError(`config file ${path} is not valid JSON: ${(err as Error).message}`);
  }
  return parseConfig(data);
}

export function defaultConfig(): AdapterConfig {
  return parseConfig({});
}

/**
 * Resolve a model-native label to a wire class.  An explicit mapping wins;
 * otherwise a label that is already a wire class maps to itself.  Returns
 * null for "ignore" mappings and raises for labels the config fails to cover.
 */
export function resolveLabel(
  cfg: AdapterConfig,
  label: string,
): (typeof ELEMENT_CLASSES)[number] | null {
  const mapped = cfg.classMap[label];
  if (mapped !== undefined) {
    return mapped === "ignore" ? null : mapped;
  }
  const identity = ELEMENT_CLASSES.find((c) => c === label);
  if (identity !== undefined) {
    return identity;
  }
  throw new ConfigError(
    `model label "${label}" is not covered by classMap and is not a wire class`,
  );
}
