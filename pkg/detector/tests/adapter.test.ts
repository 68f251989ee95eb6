import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { createBackend, detectImage, readImage } from "../src/adapter";
import type { DetectorBackend, RawDetection } from "../src/backend";
import { ConfigError, parseConfig } from "../src/config";
import { ImageReadError } from "../src/errors";
import { validateDocument } from "../src/wire";
import { jpegHeader, scenePng, solidPng } from "./helpers";

function tempImage(bytes: Buffer, name = "image.png"): string {
  const dir = mkdtempSync(join(tmpdir(), "detimg-"));
  const path = join(dir, name);
  writeFileSync(path, bytes);
  return path;
}

function fakeBackend(detections: RawDetection[]): DetectorBackend {
  return { name: "fake", detect: () => detections };
}

describe("image reading", () => {
  it("decodes PNG pixels and records dimensions", () => {
    const input = readImage(tempImage(scenePng(64, 48)));
    expect(input.size).toEqual({ width: 64, height: 48 });
    expect(input.pixels?.channels).toBe(3);
  });

  it("reads JPEG dimensions without pixels", () => {
    const input = readImage(tempImage(jpegHeader(320, 200), "photo.jpg"));
    expect(input.size).toEqual({ width: 320, height: 200 });
    expect(input.pixels).toBeUndefined();
  });

  it("raises ImageReadError for missing files and junk bytes", () => {
    expect(() => readImage("/nonexistent/sketch.png")).toThrowError(ImageReadError);
    expect(() => readImage(tempImage(Buffer.from("junk"), "junk.png"))).toThrowError(
      /unsupported image format/,
    );
  });
});

describe("detectImage", () => {
  const cfg = parseConfig({});

  it("produces a valid wire document from the stub backend", async () => {
    const path = tempImage(scenePng(80, 60, 2));
    const doc = await detectImage(path, cfg);
    expect(() => validateDocument(doc)).not.toThrow();
    expect(doc.image).toEqual({ width: 80, height: 60, path });
    expect(doc.elements.length).toBeGreaterThan(0);
    for (const el of doc.elements) {
      expect(el.score).toBeGreaterThanOrEqual(cfg.scoreThreshold);
    }
  });

  it("yields an empty element list for a blank image", async () => {
    const doc = await detectImage(tempImage(solidPng(50, 50, [255, 255, 255])), cfg);
    expect(doc.elements).toEqual([]);
  });

  it("drops detections below the score threshold", async () => {
    const backend = fakeBackend([
      { label: "rectangle", score: 0.9, bbox: [0, 0, 10, 10] },
      { label: "circle", score: 0.3, bbox: [20, 20, 30, 30] },
    ]);
    const doc = await detectImage(tempImage(scenePng(64, 48)), cfg, backend);
    expect(doc.elements.map((e) => e.class)).toEqual(["rectangle"]);

    const strict = parseConfig({ scoreThreshold: 1.0 });
    const none = await detectImage(tempImage(scenePng(64, 48)), strict, backend);
    expect(none.elements).toEqual([]);
  });

  it("maps model-native labels and honors ignore entries", async () => {
    const mapped = parseConfig({
      classMap: { box: "rectangle", ln: "line", smudge: "ignore" },
    });
    const backend = fakeBackend([
      { label: "box", score: 0.9, bbox: [0, 0, 10, 10] },
      {
        label: "ln",
        score: 0.8,
        bbox: [10, 10, 30, 30],
        keypoints: [
          [12, 12],
          [28, 28],
        ],
      },
      { label: "smudge", score: 0.99, bbox: [5, 5, 6, 6] },
    ]);
    const doc = await detectImage(tempImage(scenePng(64, 48)), mapped, backend);
    expect(doc.elements.map((e) => e.class)).toEqual(["rectangle", "line"]);
  });

  it("raises ConfigError for labels the class map misses", async () => {
    const backend = fakeBackend([{ label: "mystery", score: 0.9, bbox: [0, 0, 5, 5] }]);
    await expect(
      detectImage(tempImage(scenePng(64, 48)), cfg, backend),
    ).rejects.toThrowError(ConfigError);
  });

  it("strips keypoints from shapes and synthesizes connector endpoints", async () => {
    const backend = fakeBackend([
      {
        label: "rectangle",
        score: 0.9,
        bbox: [0, 0, 10, 10],
        keypoints: [
          [0, 0],
          [10, 10],
        ],
      },
      { label: "arrow", score: 0.9, bbox: [20, 20, 40, 30] },
    ]);
    const doc = await detectImage(tempImage(scenePng(64, 48)), cfg, backend);
    const [rect, arrow] = doc.elements;
    expect(rect?.keypoints).toBeUndefined();
    expect(arrow?.keypoints).toEqual([
      [20, 20],
      [40, 30],
    ]);
  });

  it("flips connector endpoints for classes listed in flipKeypoints", async () => {
    const backend = fakeBackend([
      {
        label: "arrow",
        score: 0.9,
        bbox: [0, 0, 30, 10],
        keypoints: [
          [2, 5],
          [28, 5],
        ],
      },
      {
        label: "line",
        score: 0.9,
        bbox: [0, 20, 30, 30],
        keypoints: [
          [2, 25],
          [28, 25],
        ],
      },
    ]);
    const flipped = parseConfig({ flipKeypoints: ["arrow"] });
    const doc = await detectImage(tempImage(scenePng(64, 48)), flipped, backend);
    expect(doc.elements[0]?.keypoints).toEqual([
      [28, 5],
      [2, 5],
    ]);
    expect(doc.elements[1]?.keypoints).toEqual([
      [2, 25],
      [28, 25],
    ]);
  });

  it("clamps geometry into the image frame", async () => {
    const backend = fakeBackend([
      { label: "rectangle", score: 0.9, bbox: [-10, -5, 1000, 1000] },
      {
        label: "arrow",
        score: 0.9,
        bbox: [50, 40, 10, 5], // unordered corners
        keypoints: [
          [-3, 2],
          [999, 47],
        ],
      },
    ]);
    const doc = await detectImage(tempImage(scenePng(64, 48)), cfg, backend);
    expect(doc.elements[0]?.bbox).toEqual([0, 0, 64, 48]);
    expect(doc.elements[1]?.bbox).toEqual([10, 5, 50, 40]);
    expect(doc.elements[1]?.keypoints).toEqual([
      [0, 2],
      [64, 47],
    ]);
  });

  it("selects the stub backend when no model path is configured", async () => {
    const backend = await createBackend(cfg);
    expect(backend.name).toBe("stub");
  });
});
