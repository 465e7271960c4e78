/**
 * Series rendering: one PNG per snapshot, panel layout, color scaling,
 * byte determinism, and partial rendering when files are corrupt.
 */

import { copyFileSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { basename, join } from "node:path";
import { describe, expect, it } from "vitest";

import { dataRange, makeColormap, normalize } from "../src/colormap.js";
import {
  MODE_COLUMNS,
  columnRanges,
  defaultPixelScale,
  panelImageSize,
  renderSeries,
  renderSnapshot,
} from "../src/render.js";
import { loadSeries, readSnapshot } from "../src/txcs.js";
import { decodePixels } from "./png.test.js";

const FIXTURES = join(__dirname, "fixtures");
const SERIES = join(FIXTURES, "series");

function tmp(prefix: string): string {
  return mkdtempSync(join(tmpdir(), prefix));
}

function pixelAt(img: { width: number; pixels: Buffer }, x: number, y: number): number[] {
  const at = 3 * (y * img.width + x);
  return [img.pixels[at], img.pixels[at + 1], img.pixels[at + 2]];
}

describe("renderSeries", () => {
  it("writes one 4-panel image per snapshot in fields mode", () => {
    const out = tmp("png-");
    const { written, errors } = renderSeries({ dir: SERIES, mode: "fields", outDir: out });
    expect(errors).toEqual([]);
    expect(written.map((p) => basename(p))).toEqual([
      "snapshot_000000.png",
      "snapshot_000001.png",
    ]);
    const img = decodePixels(readFileSync(written[0]));
    const scale = defaultPixelScale(6, 5);
    expect({ width: img.width, height: img.height }).toEqual(panelImageSize(6, 5, scale, 4));
  });

  it("writes 3-panel images in diff mode", () => {
    const out = tmp("png-");
    const { written } = renderSeries({ dir: SERIES, mode: "diff", outDir: out, pixelScale: 3 });
    const img = decodePixels(readFileSync(written[0]));
    expect({ width: img.width, height: img.height }).toEqual(panelImageSize(6, 5, 3, 3));
  });

  it("is byte-deterministic across runs", () => {
    const a = tmp("png-");
    const b = tmp("png-");
    renderSeries({ dir: SERIES, mode: "fields", outDir: a, pixelScale: 2 });
    renderSeries({ dir: SERIES, mode: "fields", outDir: b, pixelScale: 2 });
    for (const name of ["snapshot_000000.png", "snapshot_000001.png"]) {
      expect(readFileSync(join(a, name)).equals(readFileSync(join(b, name)))).toBe(true);
    }
  });

  it("renders the readable snapshots when one file is corrupt", () => {
    const dir = tmp("series-");
    copyFileSync(join(SERIES, "snapshot_000000.txcs"), join(dir, "snapshot_000000.txcs"));
    writeFileSync(join(dir, "snapshot_000001.txcs"), "garbage");
    const out = tmp("png-");
    const { written, errors } = renderSeries({ dir, mode: "fields", outDir: out, pixelScale: 2 });
    expect(written).toHaveLength(1);
    expect(errors).toHaveLength(1);
    expect(errors[0].file).toBe("snapshot_000001.txcs");
  });

  it("renders a uniform zero snapshot with the widened range", () => {
    const out = tmp("png-");
    const { written, errors } = renderSeries({
      dir: join(FIXTURES, "zero"),
      mode: "fields",
      outDir: out,
      pixelScale: 2,
    });
    expect(errors).toEqual([]);
    const img = decodePixels(readFileSync(written[0]));
    // all-zero data maps through [0, 1], so every panel cell is cmap(0)
    const low = makeColormap("viridis")(0);
    expect(pixelAt(img, 10, 10)).toEqual(low);
    expect(pixelAt(img, 11, 15)).toEqual(low);
  });
});

describe("renderSnapshot geometry", () => {
  // golden snapshot: 4x3 grid, u = cell index (row-major from the bottom)
  const snap = readSnapshot(join(FIXTURES, "golden.txcs"));
  const cmap = makeColormap("viridis");
  const columns = MODE_COLUMNS.fields;
  const ranges = columns.map((name) => dataRange([snap.fields[name]]));
  const img = renderSnapshot(snap, columns, ranges, cmap, 2);
  const buf = { width: img.width, pixels: Buffer.from(img.pixels) };

  it("puts grid row 0 at the bottom of the panel", () => {
    const uRange = ranges[0]; // u spans 0..11
    // top-left panel pixel = u[j=2, i=0] = 8; bottom-left = u[0] = 0
    expect(pixelAt(buf, 10, 10)).toEqual(cmap(normalize(8, uRange)));
    expect(pixelAt(buf, 10, 10 + 2 * 2)).toEqual(cmap(normalize(0, uRange)));
  });

  it("draws the colorbar high end at the top", () => {
    const barX = 10 + 4 * 2 + 4; // panel width + gap
    expect(pixelAt(buf, barX, 10)).toEqual(cmap(1));
    expect(pixelAt(buf, barX, 10 + 3 * 2 - 1)).toEqual(cmap(0));
  });

  it("places the second panel after the bar and gap", () => {
    const panel2X = 10 + (4 * 2 + 4 + 10) + 14;
    // v is uniform 0.5, so its widened range [0.5, 1.5] maps it to cmap(0)
    expect(pixelAt(buf, panel2X, 10)).toEqual(cmap(0));
  });
});

describe("columnRanges", () => {
  const { snapshots } = loadSeries(SERIES);

  it("shares one range per column across the series by default", () => {
    const rangesFor = columnRanges(snapshots, ["u", "z"], "shared");
    expect(rangesFor(snapshots[0])).toEqual(rangesFor(snapshots[1]));
    const zShared = rangesFor(snapshots[0])[1];
    // the shared z range must cover the later, larger-amplitude frame
    expect(zShared.hi).toBeGreaterThan(1.4);
    expect(zShared.lo).toBeLessThan(0);
  });

  it("scopes ranges to one snapshot in per-panel mode", () => {
    const rangesFor = columnRanges(snapshots, ["z"], "per-panel");
    expect(rangesFor(snapshots[0])[0].hi).toBeLessThan(1.0);
    expect(rangesFor(snapshots[1])[0].hi).toBeGreaterThan(1.4);
  });
});
