/**
 * Test fixtures: a minimal PNG encoder (enough to produce valid files for
 * the decoder under test) and tiny JPEG headers for dimension parsing.
 */

import { deflateSync } from "node:zlib";

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buffer: Buffer): number {
  let crc = 0xffffffff;
  for (let i = 0; i < buffer.length; i++) {
    crc = (CRC_TABLE[(crc ^ (buffer[i] as number)) & 0xff] as number) ^ (crc >>> 8);
  }
  return (crc ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Buffer): Buffer {
  const header = Buffer.alloc(8);
  header.writeUInt32BE(data.length, 0);
  header.write(type, 4, "latin1");
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(Buffer.concat([header.subarray(4), data])), 0);
  return Buffer.concat([header, data, crc]);
}

const COLOR_TYPE_BY_CHANNELS: Record<number, number> = { 1: 0, 2: 4, 3: 2, 4: 6 };

function applyFilter(
  filter: number,
  row: Buffer,
  prev: Buffer,
  channels: number,
): Buffer {
  const out = Buffer.alloc(row.length);
  for (let x = 0; x < row.length; x++) {
    const raw = row[x] as number;
    const left = x >= channels ? (row[x - channels] as number) : 0;
    const up = prev[x] as number;
    const upLeft = x >= channels ? (prev[x - channels] as number) : 0;
    let value: number;
    switch (filter) {
      case 0:
        value = raw;
        break;
      case 1:
        value = raw - left;
        break;
      case 2:
        value = raw - up;
        break;
      case 3:
        value = raw - ((left + up) >> 1);
        break;
      case 4: {
        const p = left + up - upLeft;
        const pa = Math.abs(p - left);
        const pb = Math.abs(p - up);
        const pc = Math.abs(p - upLeft);
        const pred = pa <= pb && pa <= pc ? left : pb <= pc ? up : upLeft;
        value = raw - pred;
        break;
      }
      default:
        throw new Error(`bad filter ${filter}`);
    }
    out[x] = value & 0xff;
  }
  return out;
}

/**
 * Encode raw 8-bit samples as a PNG.  `filter` selects the row filter used
 * for every scanline (0..4), defaulting to none.
 */
export function encodePng(
  width: number,
  height: number,
  pixels: Buffer,
  channels: 1 | 2 | 3 | 4 = 3,
  filter = 0,
): Buffer {
  if (pixels.length !== width * height * channels) {
    throw new Error("pixel buffer length mismatch");
  }
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = COLOR_TYPE_BY_CHANNELS[channels] as number;
  ihdr[10] = 0; // compression
  ihdr[11] = 0; // filter method
  ihdr[12] = 0; // no interlace

  const stride = width * channels;
  const rows: Buffer[] = [];
  let prev = Buffer.alloc(stride);
  for (let y = 0; y < height; y++) {
    const row = pixels.subarray(y * stride, (y + 1) * stride);
    rows.push(Buffer.from([filter]), applyFilter(filter, row, prev, channels));
    prev = row;
  }
  const idat = deflateSync(Buffer.concat(rows));
  return Buffer.concat([
    Buffer.from([137, 80, 78, 71, 13, 10, 26, 10]),
    chunk("IHDR", ihdr),
    chunk("IDAT", idat),
    chunk("IEND", Buffer.alloc(0)),
  ]);
}

/** A PNG filled with one RGB color. */
export function solidPng(width: number, height: number, rgb: [number, number, number]): Buffer {
  const pixels = Buffer.alloc(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    pixels[i * 3] = rgb[0];
    pixels[i * 3 + 1] = rgb[1];
    pixels[i * 3 + 2] = rgb[2];
  }
  return encodePng(width, height, pixels, 3);
}

/** A white PNG with a dark rectangle — a minimal non-blank "sketch". */
export function scenePng(width: number, height: number, seed = 0): Buffer {
  const pixels = Buffer.alloc(width * height * 3, 255);
  const x0 = 2 + (seed % 5);
  const y0 = 2 + (seed % 3);
  const x1 = Math.min(width - 3, x0 + Math.floor(width / 2));
  const y1 = Math.min(height - 3, y0 + Math.floor(height / 2));
  for (let y = y0; y <= y1; y++) {
    for (let x = x0; x <= x1; x++) {
      const border = y === y0 || y === y1 || x === x0 || x === x1;
      if (border) {
        const base = (y * width + x) * 3;
        pixels[base] = 30 + seed;
        pixels[base + 1] = 30;
        pixels[base + 2] = 40;
      }
    }
  }
  return encodePng(width, height, pixels, 3);
}

/** Gradient test pattern exercising all byte values across rows/columns. */
export function gradientPixels(width: number, height: number, channels: number): Buffer {
  const pixels = Buffer.alloc(width * height * channels);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      for (let c = 0; c < channels; c++) {
        pixels[(y * width + x) * channels + c] = (x * 7 + y * 13 + c * 101) & 0xff;
      }
    }
  }
  return pixels;
}

/**
 * Minimal JPEG: SOI, an APP0 segment to skip, SOF0 carrying the dimensions,
 * EOI.  Not decodable — only the headers matter for dimension parsing.
 */
export function jpegHeader(width: number, height: number): Buffer {
  const app0 = Buffer.from([
    0xff, 0xe0, 0x00, 0x10,
    0x4a, 0x46, 0x49, 0x46, 0x00, // "JFIF\0"
    0x01, 0x01, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00,
  ]);
  const sof0 = Buffer.alloc(13);
  sof0[0] = 0xff;
  sof0[1] = 0xc0;
  sof0.writeUInt16BE(11, 2); // segment length
  sof0[4] = 8; // precision
  sof0.writeUInt16BE(height, 5);
  sof0.writeUInt16BE(width, 7);
  sof0[9] = 1; // one component
  sof0[10] = 1;
  sof0[11] = 0x11;
  sof0[12] = 0;
  return Buffer.concat([
    Buffer.from([0xff, 0xd8]),
    app0,
    sof0,
    Buffer.from([0xff, 0xd9]),
  ]);
}
