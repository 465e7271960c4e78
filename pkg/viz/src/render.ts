/**
 * Panel-grid rendering of snapshot series.
 *
 * Every snapshot becomes one image. Fields mode lays out four heatmap
 * panels in the column order u, v, z, w (tumor cells, ECs, VEGF,
 * tissue); diff mode lays out the three difference components u, z, w.
 * Each panel carries a vertical colorbar ramp at its right edge. By
 * default a column shares one color range across all times, so a
 * sequence of images reads as an evolution; per-panel scaling is
 * available for single-frame inspection.
 *
 * Rendering is a pure function of (snapshots, spec): repeated runs
 * produce byte-identical PNGs.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { Colormap, Range, dataRange, makeColormap, normalize } from "./colormap.js";
import { encodePng } from "./png.js";
import { FieldName, Snapshot, loadSeries } from "./txcs.js";

export type PlotMode = "fields" | "diff";
export type Scaling = "shared" | "per-panel";

export const MODE_COLUMNS: Record<PlotMode, FieldName[]> = {
  fields: ["u", "v", "z", "w"],
  diff: ["u", "z", "w"],
};

export const DEFAULT_COLORMAP: Record<PlotMode, string> = {
  fields: "viridis",
  diff: "coolwarm",
};

export interface PlotSpec {
  /** Directory holding the *.txcs series. */
  dir: string;
  mode: PlotMode;
  /** Output directory for the PNG files (created if missing). */
  outDir: string;
  colormap?: string;
  scaling?: Scaling;
  /** Pixels per grid cell; derived from the grid when omitted. */
  pixelScale?: number;
}

export interface RenderResult {
  written: string[];
  errors: { file: string; message: string }[];
}

const OUTER = 10;
const PANEL_GAP = 14;
const CBAR_W = 10;
const CBAR_GAP = 4;
const BG: [number, number, number] = [255, 255, 255];

export function defaultPixelScale(nx: number, ny: number): number {
  return Math.max(1, Math.round(220 / Math.max(nx, ny)));
}

export interface ImageBuffer {
  width: number;
  height: number;
  pixels: Uint8Array;
}

function blankImage(width: number, height: number): ImageBuffer {
  const pixels = new Uint8Array(3 * width * height);
  for (let k = 0; k < width * height; k++) {
    pixels[3 * k] = BG[0];
    pixels[3 * k + 1] = BG[1];
    pixels[3 * k + 2] = BG[2];
  }
  return { width, height, pixels };
}

function putPixel(img: ImageBuffer, x: number, y: number, rgb: [number, number, number]): void {
  const at = 3 * (y * img.width + x);
  img.pixels[at] = rgb[0];
  img.pixels[at + 1] = rgb[1];
  img.pixels[at + 2] = rgb[2];
}

function drawPanel(
  img: ImageBuffer,
  x0: number,
  y0: number,
  values: Float64Array,
  nx: number,
  ny: number,
  scale: number,
  range: Range,
  cmap: Colormap,
): void {
  for (let j = 0; j < ny; j++) {
    // grid row 0 sits at the bottom of the panel
    const py = y0 + (ny - 1 - j) * scale;
    for (let i = 0; i < nx; i++) {
      const rgb = cmap(normalize(values[j * nx + i], range));
      const px = x0 + i * scale;
      for (let dy = 0; dy < scale; dy++) {
        for (let dx = 0; dx < scale; dx++) {
          putPixel(img, px + dx, py + dy, rgb);
        }
      }
    }
  }
}

function drawColorbar(
  img: ImageBuffer,
  x0: number,
  y0: number,
  height: number,
  cmap: Colormap,
): void {
  for (let y = 0; y < height; y++) {
    // top of the bar shows the high end of the range
    const t = height === 1 ? 1 : 1 - y / (height - 1);
    const rgb = cmap(t);
    for (let x = 0; x < CBAR_W; x++) {
      putPixel(img, x0 + x, y0 + y, rgb);
    }
  }
}

export function panelImageSize(
  nx: number,
  ny: number,
  scale: number,
  panels: number,
): { width: number; height: number } {
  const panelW = nx * scale + CBAR_GAP + CBAR_W;
  return {
    width: 2 * OUTER + panels * panelW + (panels - 1) * PANEL_GAP,
    height: 2 * OUTER + ny * scale,
  };
}

/** Compose the panel row for one snapshot into a raw RGB buffer. */
export function renderSnapshot(
  snap: Snapshot,
  columns: FieldName[],
  ranges: Range[],
  cmap: Colormap,
  scale: number,
): ImageBuffer {
  const { nx, ny } = snap.grid;
  const { width, height } = panelImageSize(nx, ny, scale, columns.length);
  const img = blankImage(width, height);
  let x = OUTER;
  columns.forEach((name, c) => {
    drawPanel(img, x, OUTER, snap.fields[name], nx, ny, scale, ranges[c], cmap);
    x += nx * scale + CBAR_GAP;
    drawColorbar(img, x, OUTER, ny * scale, cmap);
    x += CBAR_W + PANEL_GAP;
  });
  return img;
}

/** Color range per column: shared across the series or per snapshot. */
export function columnRanges(
  snapshots: Snapshot[],
  columns: FieldName[],
  scaling: Scaling,
): (snap: Snapshot) => Range[] {
  if (scaling === "shared") {
    const shared = columns.map((name) =>
      dataRange(snapshots.map((s) => s.fields[name])),
    );
    return () => shared;
  }
  return (snap) => columns.map((name) => dataRange([snap.fields[name]]));
}

export function renderSeries(spec: PlotSpec): RenderResult {
  const columns = MODE_COLUMNS[spec.mode];
  if (!columns) {
    throw new Error(`unknown plot mode '${spec.mode}'`);
  }
  const cmap = makeColormap(spec.colormap ?? DEFAULT_COLORMAP[spec.mode]);
  const { snapshots, errors } = loadSeries(spec.dir);
  const written: string[] = [];
  if (snapshots.length === 0) {
    return { written, errors };
  }
  const scale = spec.pixelScale ?? defaultPixelScale(snapshots[0].grid.nx, snapshots[0].grid.ny);
  const rangesFor = columnRanges(snapshots, columns, spec.scaling ?? "shared");

  mkdirSync(spec.outDir, { recursive: true });
  for (const snap of snapshots) {
    const img = renderSnapshot(snap, columns, rangesFor(snap), cmap, scale);
    const name = snap.source.replace(/\.txcs$/, ".png");
    const path = join(spec.outDir, name);
    writeFileSync(path, encodePng(img.width, img.height, img.pixels));
    written.push(path);
  }
  return { written, errors };
}
