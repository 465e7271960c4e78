/**
 * Reader for the TXCS binary snapshot format.
 *
 * Layout (all little-endian):
 *
 *   bytes 0..3   magic "TXCS"
 *   u32          format version (1)
 *   u32          nx
 *   u32          ny
 *   f64          dx
 *   f64          dy
 *   f64          t
 *   4 blocks of  nx*ny f64, row-major (index j*nx + i), order u, v, w, z
 *
 * The parsed arrays must be byte-identical to what the producer wrote;
 * payloadSha256 fingerprints them so conformance is checkable across
 * implementations.
 */

import { createHash } from "node:crypto";
import { readFileSync, readdirSync } from "node:fs";
import { join, basename } from "node:path";

export const MAGIC = "TXCS";
export const FORMAT_VERSION = 1;
export const HEADER_BYTES = 40;

export const FIELD_ORDER = ["u", "v", "w", "z"] as const;
export type FieldName = (typeof FIELD_ORDER)[number];

export interface GridSpec {
  nx: number;
  ny: number;
  dx: number;
  dy: number;
}

export interface Snapshot {
  grid: GridSpec;
  t: number;
  /** Row-major nx*ny values per field, index j*nx + i. */
  fields: Record<FieldName, Float64Array>;
  /** Source file name, kept for output naming and error reports. */
  source: string;
}

export class SnapshotFormatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SnapshotFormatError";
  }
}

function readBlock(buf: Buffer, offset: number, count: number): Float64Array {
  const out = new Float64Array(count);
  for (let k = 0; k < count; k++) {
    out[k] = buf.readDoubleLE(offset + 8 * k);
  }
  return out;
}

export function parseSnapshot(buf: Buffer, source: string): Snapshot {
  if (buf.length < HEADER_BYTES) {
    throw new SnapshotFormatError(`${source}: truncated header (${buf.length} bytes)`);
  }
  const magic = buf.toString("latin1", 0, 4);
  if (magic !== MAGIC) {
    throw new SnapshotFormatError(`${source}: wrong magic ${JSON.stringify(magic)}`);
  }
  const version = buf.readUInt32LE(4);
  if (version !== FORMAT_VERSION) {
    throw new SnapshotFormatError(`${source}: unsupported format version ${version}`);
  }
  const nx = buf.readUInt32LE(8);
  const ny = buf.readUInt32LE(12);
  const dx = buf.readDoubleLE(16);
  const dy = buf.readDoubleLE(24);
  const t = buf.readDoubleLE(32);
  if (nx === 0 || ny === 0 || !(dx > 0) || !(dy > 0)) {
    throw new SnapshotFormatError(
      `${source}: invalid grid header nx=${nx} ny=${ny} dx=${dx} dy=${dy}`,
    );
  }
  const n = nx * ny;
  const expected = HEADER_BYTES + 4 * 8 * n;
  if (buf.length !== expected) {
    throw new SnapshotFormatError(
      `${source}: payload shape mismatch (got ${buf.length} bytes, need ${expected})`,
    );
  }
  const fields = {} as Record<FieldName, Float64Array>;
  FIELD_ORDER.forEach((name, idx) => {
    fields[name] = readBlock(buf, HEADER_BYTES + 8 * n * idx, n);
  });
  return { grid: { nx, ny, dx, dy }, t, fields, source };
}

export function readSnapshot(path: string): Snapshot {
  let buf: Buffer;
  try {
    buf = readFileSync(path);
  } catch (err) {
    throw new SnapshotFormatError(`cannot read snapshot ${path}: ${(err as Error).message}`);
  }
  return parseSnapshot(buf, basename(path));
}

/**
 * SHA-256 over the four parsed field blocks re-serialized as
 * little-endian f64 (u, v, w, z order). Hashing the parsed arrays, not
 * the raw file slice, is the point: it certifies the decode.
 */
export function payloadSha256(snap: Snapshot): string {
  const hash = createHash("sha256");
  for (const name of FIELD_ORDER) {
    const arr = snap.fields[name];
    const bytes = Buffer.allocUnsafe(8 * arr.length);
    for (let k = 0; k < arr.length; k++) {
      bytes.writeDoubleLE(arr[k], 8 * k);
    }
    hash.update(bytes);
  }
  return hash.digest("hex");
}

export interface SeriesLoad {
  snapshots: Snapshot[];
  /** Per-file failures; the good files are still returned. */
  errors: { file: string; message: string }[];
}

function sameGrid(a: GridSpec, b: GridSpec): boolean {
  return a.nx === b.nx && a.ny === b.ny && a.dx === b.dx && a.dy === b.dy;
}

/**
 * Read every *.txcs in a directory in name order, skipping (and
 * reporting) files that fail to parse or disagree with the first
 * readable snapshot's grid.
 */
export function loadSeries(dir: string): SeriesLoad {
  let names: string[];
  try {
    names = readdirSync(dir).filter((f) => f.endsWith(".txcs")).sort();
  } catch (err) {
    throw new SnapshotFormatError(`cannot list ${dir}: ${(err as Error).message}`);
  }
  if (names.length === 0) {
    throw new SnapshotFormatError(`no snapshots found in ${dir}`);
  }
  const snapshots: Snapshot[] = [];
  const errors: SeriesLoad["errors"] = [];
  for (const name of names) {
    try {
      const snap = readSnapshot(join(dir, name));
      if (snapshots.length > 0 && !sameGrid(snap.grid, snapshots[0].grid)) {
        throw new SnapshotFormatError(`${name}: grid differs from the first snapshot`);
      }
      snapshots.push(snap);
    } catch (err) {
      if (err instanceof SnapshotFormatError) {
        errors.push({ file: name, message: err.message });
      } else {
        throw err;
      }
    }
  }
  return { snapshots, errors };
}
