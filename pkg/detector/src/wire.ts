/**
 * Detection wire format shared with the conversion pipeline.
 *
 * A document is a JSON object:
 *
 *     {
 *       "image": {"width": W, "height": H, "path": "optional/source.png"},
 *       "elements": [
 *         {"class": "rectangle", "score": 0.97, "bbox": [x0, y0, x1, y1]},
 *         {"class": "arrow", "score": 0.88, "bbox": [...],
 *          "keypoints": [[xf, yf], [xt, yt]]},
 *         {"class": "textblock", "score": 0.91, "bbox": [...], "text": "hi"}
 *       ]
 *     }
 *
 * Adapter outputs additionally guarantee: connector elements carry exactly
 * two keypoints, and shape/text elements carry none.
 */

import { z } from "zod";

export const SHAPE_CLASSES = [
  "circle",
  "diamond",
  "hexagon",
  "long_oval",
  "parallelogram",
  "rectangle",
  "trapezoid",
  "triangle",
] as const;

export const CONNECTOR_CLASSES = ["arrow", "double_arrow", "line"] as const;

export const TEXT_CLASS = "textblock" as const;

export const ELEMENT_CLASSES = [
  ...SHAPE_CLASSES,
  TEXT_CLASS,
  ...CONNECTOR_CLASSES,
] as const;

export type ElementClassName = (typeof ELEMENT_CLASSES)[number];

export function isConnectorClass(cls: ElementClassName): boolean {
  return (CONNECTOR_CLASSES as readonly string[]).includes(cls);
}

const pointSchema = z.tuple([z.number().finite(), z.number().finite()]);

const bboxSchema = z
  .tuple([
    z.number().finite(),
    z.number().finite(),
    z.number().finite(),
    z.number().finite(),
  ])
  .refine(([x0, y0, x1, y1]) => x0 <= x1 && y0 <= y1, {
    message: "bbox corners must satisfy x0 <= x1 and y0 <= y1",
  });

export const elementSchema = z
  .object({
    class: z.enum(ELEMENT_CLASSES),
    score: z.number().min(0).max(1),
    bbox: bboxSchema,
    keypoints: z.tuple([pointSchema, pointSchema]).optional(),
    text: z.string().optional(),
  })
  .superRefine((el, ctx) => {
    if (isConnectorClass(el.class)) {
      if (!el.keypoints) {
        ctx.addIssue({
          code: z.ZodIssueCode.custom,
          message: `${el.class} element requires exactly two keypoints`,
        });
      }
    } else if (el.keypoints) {
      ctx.addIssue({
        code: z.ZodIssueCode.custom,
        message: `${el.class} element must not carry keypoints`,
      });
    }
  });

export const documentSchema = z.object({
  image: z.object({
    width: z.number().int().positive(),
    height: z.number().int().positive(),
    path: z.string().optional(),
  }),
  elements: z.array(elementSchema),
});

export type WireElement = z.infer<typeof elementSchema>;
export type WireDocument = z.infer<typeof documentSchema>;

/** Parse and validate a serialized document; throws ZodError on violation. */
export function parseDocument(data: string | Buffer): WireDocument {
  const text = typeof data === "string" ? data : data.toString("utf-8");
  return documentSchema.parse(JSON.parse(text));
}

/** Validate an in-memory document and return it typed. */
export function validateDocument(doc: unknown): WireDocument {
  return documentSchema.parse(doc);
}

/** Serialize with a trailing newline, ready to write as a `.det` file. */
export function serializeDocument(doc: WireDocument): string {
  return JSON.stringify(validateDocument(doc), null, 2) + "\n";
}
