/** Diagnostics table parsing; the fixture is a real simulator output. */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseDiagnostics, readDiagnostics, summarizeDiagnostics } from "../src/csv.js";

const FIXTURE = join(__dirname, "fixtures", "diagnostics.csv");

describe("parseDiagnostics", () => {
  it("reads the simulator's diagnostics table", () => {
    const table = readDiagnostics(FIXTURE);
    expect(table.columns[0]).toBe("t");
    expect(table.columns).toContain("mass_u");
    expect(table.columns).toContain("negativity_excess");
    expect(table.columns).toContain("change_rate");
    expect(table.rows).toHaveLength(3);
    expect(table.rows.map((r) => r.t)).toEqual([0, 0.05, 0.1]);
    expect(table.rows[0].mass_u).toBeGreaterThan(0);
    // the first record has no predecessor, so its change rate is nan
    expect(Number.isNaN(table.rows[0].change_rate)).toBe(true);
    expect(Number.isFinite(table.rows[1].change_rate)).toBe(true);
  });

  it("understands python-style inf spellings", () => {
    const table = parseDiagnostics("t,a\n0.0,inf\n1.0,-inf\n2.0,nan\n");
    expect(table.rows[0].a).toBe(Infinity);
    expect(table.rows[1].a).toBe(-Infinity);
    expect(Number.isNaN(table.rows[2].a)).toBe(true);
  });

  it("rejects a table without a time column", () => {
    expect(() => parseDiagnostics("a,b\n1,2\n")).toThrow(/'t' column/);
  });
});

describe("summarizeDiagnostics", () => {
  it("reports record count, time span, drift and negativity", () => {
    const line = summarizeDiagnostics(readDiagnostics(FIXTURE));
    expect(line).toContain("3 records");
    expect(line).toContain("t=0..0.1");
    expect(line).toContain("mass_u drift");
    expect(line).toContain("worst negativity");
  });

  it("is empty for a header-only table", () => {
    expect(summarizeDiagnostics(parseDiagnostics("t,mass_u\n"))).toBe("");
  });
});
