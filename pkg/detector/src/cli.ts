#!/usr/bin/env node
/**
 * Command-line front end: `flowmind-detect detect <images...> --out-dir DIR`.
 * Writes one detection document (.det) per input image, named after the
 * image's basename.  Exit codes: 0 success, 1 runtime failure (unreadable
 * image, model load failure, write failure), 2 usage or config error.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { basename, extname, join } from "node:path";

import yargs from "yargs";

import { createBackend, detectImage } from "./adapter";
import type { AdapterConfig } from "./config";
import { ConfigError, defaultConfig, loadConfig, parseConfig } from "./config";
import { ImageReadError, ModelLoadError } from "./errors";
import { serializeDocument } from "./wire";

class UsageError extends Error {}

interface DetectArgs {
  images: string[];
  outDir: string;
  scoreThreshold?: number;
  model?: string;
  config?: string;
  device?: "cpu" | "gpu";
}

function effectiveConfig(args: DetectArgs): AdapterConfig {
  const base: AdapterConfig = args.config !== undefined
    ? loadConfig(args.config)
    : defaultConfig();
  const merged: Record<string, unknown> = { ...base };
  if (args.model !== undefined) {
    merged.modelPath = args.model;
  }
  if (args.scoreThreshold !== undefined) {
    merged.scoreThreshold = args.scoreThreshold;
  }
  if (args.device !== undefined) {
    merged.device = args.device;
  }
  return parseConfig(merged); // re-validate flag overrides (threshold range etc.)
}

async function runDetect(args: DetectArgs): Promise<number> {
  const cfg = effectiveConfig(args);
  try {
    mkdirSync(args.outDir, { recursive: true });
  } catch (err) {
    console.error(
      `error: cannot create output directory ${args.outDir}: ${(err as Error).message}`,
    );
    return 1;
  }
  const backend = await createBackend(cfg);
  for (const image of args.images) {
    const doc = await detectImage(image, cfg, backend);
    const stem = basename(image, extname(image));
    const outPath = join(args.outDir, `${stem}.det`);
    try {
      writeFileSync(outPath, serializeDocument(doc));
    } catch (err) {
      console.error(`error: cannot write ${outPath}: ${(err as Error).message}`);
      return 1;
    }
    console.log(`wrote ${outPath} (${doc.elements.length} elements)`);
  }
  return 0;
}

export async function main(argv: string[]): Promise<number> {
  let exitCode = 0;
  const parser = yargs(argv)
    .scriptName("flowmind-detect")
    .command(
      "detect <images...>",
      "run the detector on images and write one detection document per image",
      (y) =>
        y
          .positional("images", {
            describe: "input images (PNG, or JPEG with the stub backend)",
            type: "string",
            array: true,
            demandOption: true,
          })
          .option("out-dir", {
            describe: "directory receiving the .det files",
            type: "string",
            demandOption: true,
          })
          .option("score-threshold", {
            describe: "drop detections scoring below this value",
            type: "number",
          })
          .option("model", {
            describe:
              "path to a TensorFlow.js graph model; omit to use the stub backend",
            type: "string",
          })
          .option("config", {
            describe: "JSON adapter config (class map, threshold, device)",
            type: "string",
          })
          .option("device", {
            describe: "execution device for the model backend",
            choices: ["cpu", "gpu"] as const,
          }),
      async (args) => {
        exitCode = await runDetect(args as unknown as DetectArgs);
      },
    )
    .demandCommand(1, "specify a command (try: detect)")
    .strict()
    .version("0.1.0")
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new UsageError(msg ?? "invalid usage");
    });

  try {
    await parser.parseAsync();
  } catch (err) {
    if (err instanceof UsageError || err instanceof ConfigError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    if (err instanceof ImageReadError || err instanceof ModelLoadError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  return exitCode;
}

if (require.main === module) {
  void main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
