/**
 * Small self-contained colormaps: anchor stops with linear
 * interpolation. Values are mapped through a [lo, hi] range first; a
 * degenerate range (hi == lo) falls back to [value, value+1] so uniform
 * fields still render instead of dividing by zero.
 */

export type RGB = [number, number, number];

type Stop = [number, RGB];

// perceptually ordered dark-to-bright ramp (viridis anchor samples)
const VIRIDIS: Stop[] = [
  [0.0, [68, 1, 84]],
  [0.125, [71, 44, 122]],
  [0.25, [59, 81, 139]],
  [0.375, [44, 113, 142]],
  [0.5, [33, 144, 141]],
  [0.625, [39, 173, 129]],
  [0.75, [92, 200, 99]],
  [0.875, [170, 220, 50]],
  [1.0, [253, 231, 37]],
];

// blue-white-red diverging ramp for signed difference fields
const COOLWARM: Stop[] = [
  [0.0, [59, 76, 192]],
  [0.25, [124, 159, 249]],
  [0.5, [247, 247, 247]],
  [0.75, [245, 152, 122]],
  [1.0, [180, 4, 38]],
];

const GRAY: Stop[] = [
  [0.0, [0, 0, 0]],
  [1.0, [255, 255, 255]],
];

const MAPS: Record<string, Stop[]> = {
  viridis: VIRIDIS,
  coolwarm: COOLWARM,
  gray: GRAY,
};

export const COLORMAP_NAMES = Object.keys(MAPS);

export type Colormap = (t: number) => RGB;

/** Build an interpolating map from a normalized t in [0,1] to RGB. */
export function makeColormap(name: string): Colormap {
  const stops = MAPS[name];
  if (!stops) {
    throw new Error(`unknown colormap '${name}' (choose from ${COLORMAP_NAMES.join(", ")})`);
  }
  return (t: number): RGB => {
    if (!Number.isFinite(t)) {
      return [255, 0, 255]; // NaN marker, never produced by a valid range
    }
    const x = t <= 0 ? 0 : t >= 1 ? 1 : t;
    let i = 1;
    while (i < stops.length - 1 && stops[i][0] < x) {
      i++;
    }
    const [x0, c0] = stops[i - 1];
    const [x1, c1] = stops[i];
    const f = (x - x0) / (x1 - x0);
    return [
      Math.round(c0[0] + f * (c1[0] - c0[0])),
      Math.round(c0[1] + f * (c1[1] - c0[1])),
      Math.round(c0[2] + f * (c1[2] - c0[2])),
    ];
  };
}

export interface Range {
  lo: number;
  hi: number;
}

/** Min/max of the data with the degenerate fallback [value, value+1]. */
export function dataRange(arrays: Float64Array[]): Range {
  let lo = Infinity;
  let hi = -Infinity;
  for (const arr of arrays) {
    for (let k = 0; k < arr.length; k++) {
      const v = arr[k];
      if (!Number.isFinite(v)) continue; // a stray inf must not blank the scale
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    return { lo: 0, hi: 1 };
  }
  if (hi === lo) {
    return { lo, hi: lo + 1 };
  }
  return { lo, hi };
}

export function normalize(value: number, range: Range): number {
  return (value - range.lo) / (range.hi - range.lo);
}
