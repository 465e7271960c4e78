/** Command-line driver: exit status and output files. */

import { copyFileSync, existsSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli.js";

const FIXTURES = join(__dirname, "fixtures");
const SERIES = join(FIXTURES, "series");

function tmp(prefix: string): string {
  return mkdtempSync(join(tmpdir(), prefix));
}

function quiet() {
  const out = vi.spyOn(process.stdout, "write").mockImplementation(() => true);
  const err = vi.spyOn(process.stderr, "write").mockImplementation(() => true);
  return {
    stdout: () => out.mock.calls.map((c) => String(c[0])).join(""),
    stderr: () => err.mock.calls.map((c) => String(c[0])).join(""),
  };
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("txcs-plot plot", () => {
  it("renders a series and exits 0", () => {
    const io = quiet();
    const out = tmp("cli-");
    const status = main(["plot", "--dir", SERIES, "--out", out, "--scale", "2"]);
    expect(status).toBe(0);
    expect(io.stdout()).toContain("wrote 2 image(s)");
    expect(existsSync(join(out, "snapshot_000000.png"))).toBe(true);
    expect(existsSync(join(out, "snapshot_000001.png"))).toBe(true);
  });

  it("summarizes diagnostics.csv when present next to the snapshots", () => {
    const io = quiet();
    const dir = tmp("cli-series-");
    copyFileSync(join(SERIES, "snapshot_000000.txcs"), join(dir, "snapshot_000000.txcs"));
    copyFileSync(join(FIXTURES, "diagnostics.csv"), join(dir, "diagnostics.csv"));
    expect(main(["plot", "--dir", dir, "--out", tmp("cli-")])).toBe(0);
    expect(io.stdout()).toContain("diagnostics: 3 records");
  });

  it("exits 1 but keeps going when a snapshot is corrupt", () => {
    const io = quiet();
    const dir = tmp("cli-series-");
    copyFileSync(join(SERIES, "snapshot_000000.txcs"), join(dir, "snapshot_000000.txcs"));
    writeFileSync(join(dir, "snapshot_000001.txcs"), "garbage");
    const out = tmp("cli-");
    const status = main(["plot", "--dir", dir, "--out", out, "--scale", "2"]);
    expect(status).toBe(1);
    expect(io.stderr()).toContain("snapshot_000001.txcs");
    expect(existsSync(join(out, "snapshot_000000.png"))).toBe(true);
  });

  it("exits 1 on a missing directory", () => {
    const io = quiet();
    expect(main(["plot", "--dir", join(FIXTURES, "nope"), "--out", tmp("cli-")])).toBe(1);
    expect(io.stderr()).toContain("error:");
  });

  it("rejects an unknown mode", () => {
    const io = quiet();
    expect(main(["plot", "--dir", SERIES, "--out", tmp("cli-"), "--mode", "3d"])).toBe(1);
    expect(io.stderr()).toContain("error:");
  });

  it("requires a command", () => {
    quiet();
    expect(main([])).toBe(1);
  });
});
