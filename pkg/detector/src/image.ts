/**
 * Minimal image reading: dimensions for PNG and JPEG, full pixel decode for
 * baseline PNG (bit depth 8, grayscale/RGB with or without alpha, no
 * interlacing).  Pixel access is what the detector backends consume; JPEG
 * inputs are supported for dimensions and hashing only.
 */

import { inflateSync } from "node:zlib";

import { ImageReadError } from "./errors";

export interface ImageSize {
  width: number;
  height: number;
}

export interface DecodedImage extends ImageSize {
  /** Samples per pixel: 1 gray, 2 gray+alpha, 3 RGB, 4 RGBA. */
  channels: number;
  /** Row-major, 8 bits per sample, length = width * height * channels. */
  data: Buffer;
}

const PNG_SIGNATURE = Buffer.from([137, 80, 78, 71, 13, 10, 26, 10]);

export function isPng(buffer: Buffer): boolean {
  return buffer.length >= 8 && buffer.subarray(0, 8).equals(PNG_SIGNATURE);
}

export function isJpeg(buffer: Buffer): boolean {
  return buffer.length >= 2 && buffer[0] === 0xff && buffer[1] === 0xd8;
}

/** Width and height of a PNG or JPEG buffer. */
export function imageSize(buffer: Buffer): ImageSize {
  if (isPng(buffer)) {
    const { width, height } = pngHeader(buffer);
    return { width, height };
  }
  if (isJpeg(buffer)) {
    return jpegSize(buffer);
  }
  throw new ImageReadError("unsupported image format (expected PNG or JPEG)");
}

interface PngHeader extends ImageSize {
  bitDepth: number;
  colorType: number;
  interlace: number;
}

function pngHeader(buffer: Buffer): PngHeader {
  // First chunk must be IHDR: length(4) type(4) data(13)
  if (buffer.length < 33 || buffer.toString("latin1", 12, 16) !== "IHDR") {
    throw new ImageReadError("corrupt PNG: missing IHDR chunk");
  }
  const width = buffer.readUInt32BE(16);
  const height = buffer.readUInt32BE(20);
  if (width === 0 || height === 0) {
    throw new ImageReadError("corrupt PNG: zero dimension");
  }
  return {
    width,
    height,
    bitDepth: buffer[24] as number,
    colorType: buffer[25] as number,
    interlace: buffer[28] as number,
  };
}

function jpegSize(buffer: Buffer): ImageSize {
  let pos = 2;
  while (pos + 1 < buffer.length) {
    if (buffer[pos] !== 0xff) {
      throw new ImageReadError("corrupt JPEG: expected marker");
    }
    const marker = buffer[pos + 1] as number;
    if (marker === 0xff) {
      pos += 1; // fill byte
      continue;
    }
    if (marker === 0xd8 || (marker >= 0xd0 && marker <= 0xd7) || marker === 0x01) {
      pos += 2; // standalone marker
      continue;
    }
    if (pos + 3 >= buffer.length) {
      break;
    }
    const length = buffer.readUInt16BE(pos + 2);
    const isSof =
      marker >= 0xc0 &&
      marker <= 0xcf &&
      marker !== 0xc4 &&
      marker !== 0xc8 &&
      marker !== 0xcc;
    if (isSof) {
      if (pos + 8 >= buffer.length) {
        break;
      }
      return {
        height: buffer.readUInt16BE(pos + 5),
        width: buffer.readUInt16BE(pos + 7),
      };
    }
    pos += 2 + length;
  }
  throw new ImageReadError("corrupt JPEG: no frame header found");
}

const PNG_CHANNELS: Record<number, number> = { 0: 1, 2: 3, 4: 2, 6: 4 };

/** Decode a baseline PNG into 8-bit samples. */
export function decodePng(buffer: Buffer): DecodedImage {
  if (!isPng(buffer)) {
    throw new ImageReadError("not a PNG buffer");
  }
  const header = pngHeader(buffer);
  const channels = PNG_CHANNELS[header.colorType];
  if (channels === undefined) {
    throw new ImageReadError(
      `unsupported PNG color type ${header.colorType} (palette images not supported)`,
    );
  }
  if (header.bitDepth !== 8) {
    throw new ImageReadError(`unsupported PNG bit depth ${header.bitDepth}`);
  }
  if (header.interlace !== 0) {
    throw new ImageReadError("interlaced PNG not supported");
  }

  const idat: Buffer[] = [];
  let pos = 8;
  while (pos + 8 <= buffer.length) {
    const length = buffer.readUInt32BE(pos);
    const type = buffer.toString("latin1", pos + 4, pos + 8);
    if (type === "IDAT") {
      idat.push(buffer.subarray(pos + 8, pos + 8 + length));
    }
    if (type === "IEND") {
      break;
    }
    pos += 12 + length;
  }
  if (idat.length === 0) {
    throw new ImageReadError("corrupt PNG: no image data chunks");
  }
  let raw: Buffer;
  try {
    raw = inflateSync(Buffer.concat(idat));
  } catch (err) {
    throw new ImageReadError(`corrupt PNG: ${(err as Error).message}`);
  }

  const { width, height } = header;
  const stride = width * channels;
  if (raw.length < (stride + 1) * height) {
    throw new ImageReadError("corrupt PNG: truncated image data");
  }
  const out = Buffer.alloc(stride * height);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)] as number;
    const rowIn = (stride + 1) * y + 1;
    const rowOut = stride * y;
    for (let x = 0; x < stride; x++) {
      const value = raw[rowIn + x] as number;
      const left = x >= channels ? (out[rowOut + x - channels] as number) : 0;
      const up = y > 0 ? (out[rowOut - stride + x] as number) : 0;
      const upLeft =
        y > 0 && x >= channels ? (out[rowOut - stride + x - channels] as number) : 0;
      let reconstructed: number;
      switch (filter) {
        case 0:
          reconstructed = value;
          break;
        case 1:
          reconstructed = value + left;
          break;
        case 2:
          reconstructed = value + up;
          break;
        case 3:
          reconstructed = value + ((left + up) >> 1);
          break;
        case 4:
          reconstructed = value + paeth(left, up, upLeft);
          break;
        default:
          throw new ImageReadError(`corrupt PNG: unknown row filter ${filter}`);
      }
      out[rowOut + x] = reconstructed & 0xff;
    }
  }
  return { width, height, channels, data: out };
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) {
    return a;
  }
  return pb <= pc ? b : c;
}

/** True when every pixel equals the first pixel (a blank canvas). */
export function isUniform(image: DecodedImage): boolean {
  const { data, channels } = image;
  for (let i = channels; i < data.length; i++) {
    if (data[i] !== data[i % channels]) {
      return false;
    }
  }
  return true;
}
