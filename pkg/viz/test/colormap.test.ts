/** Color mapping and data-range rules. */

import { describe, expect, it } from "vitest";

import { COLORMAP_NAMES, dataRange, makeColormap, normalize } from "../src/colormap.js";

describe("makeColormap", () => {
  it("hits the viridis endpoints", () => {
    const cmap = makeColormap("viridis");
    expect(cmap(0)).toEqual([68, 1, 84]);
    expect(cmap(1)).toEqual([253, 231, 37]);
  });

  it("interpolates midway between anchors", () => {
    // gray anchors are [0,0,0] at 0 and [255,255,255] at 1
    expect(makeColormap("gray")(0.5)).toEqual([128, 128, 128]);
  });

  it("clamps out-of-range inputs", () => {
    const cmap = makeColormap("coolwarm");
    expect(cmap(-3)).toEqual(cmap(0));
    expect(cmap(7)).toEqual(cmap(1));
  });

  it("marks NaN in magenta", () => {
    expect(makeColormap("viridis")(NaN)).toEqual([255, 0, 255]);
  });

  it("rejects unknown names and lists the known ones", () => {
    expect(() => makeColormap("jet")).toThrow(/unknown colormap/);
    expect(COLORMAP_NAMES).toContain("viridis");
    expect(COLORMAP_NAMES).toContain("coolwarm");
  });
});

describe("dataRange", () => {
  it("spans the finite values of all arrays", () => {
    const r = dataRange([Float64Array.from([1, 5]), Float64Array.from([-2, 3])]);
    expect(r).toEqual({ lo: -2, hi: 5 });
  });

  it("widens a constant field to [value, value + 1]", () => {
    expect(dataRange([Float64Array.from([0, 0])])).toEqual({ lo: 0, hi: 1 });
    expect(dataRange([Float64Array.from([2.5, 2.5])])).toEqual({ lo: 2.5, hi: 3.5 });
  });

  it("ignores non-finite entries and falls back to [0, 1]", () => {
    expect(dataRange([Float64Array.from([NaN, 2, Infinity])])).toEqual({ lo: 2, hi: 3 });
    expect(dataRange([Float64Array.from([NaN, Infinity])])).toEqual({ lo: 0, hi: 1 });
  });
});

describe("normalize", () => {
  it("maps the range onto [0, 1] linearly", () => {
    const r = { lo: 2, hi: 6 };
    expect(normalize(2, r)).toBe(0);
    expect(normalize(6, r)).toBe(1);
    expect(normalize(4, r)).toBe(0.5);
  });
});
