#!/usr/bin/env node
/**
 * txcs-plot: render a snapshot series into per-time panel images.
 *
 *   txcs-plot plot --dir out/run1 --mode fields --out out/run1/png
 *
 * Exit status 0 when every readable snapshot rendered, 1 when any
 * snapshot failed to load or nothing could be rendered.
 */

import { existsSync } from "node:fs";
import { join } from "node:path";

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { COLORMAP_NAMES } from "./colormap.js";
import { readDiagnostics, summarizeDiagnostics } from "./csv.js";
import { PlotMode, Scaling, renderSeries } from "./render.js";

export function main(argv: string[]): number {
  let status = 0;
  yargs(argv)
    .scriptName("txcs-plot")
    .command(
      "plot",
      "render every snapshot in a directory to PNG",
      (y) =>
        y
          .option("dir", { type: "string", demandOption: true, describe: "directory with *.txcs files" })
          .option("mode", { choices: ["fields", "diff"] as const, default: "fields" as PlotMode, describe: "4-panel fields or 3-panel difference layout" })
          .option("out", { type: "string", demandOption: true, describe: "output directory for PNGs" })
          .option("colormap", { choices: COLORMAP_NAMES, describe: "override the per-mode default colormap" })
          .option("scaling", { choices: ["shared", "per-panel"] as const, default: "shared" as Scaling, describe: "color range shared across times or per panel" })
          .option("scale", { type: "number", describe: "pixels per grid cell" }),
      (args) => {
        try {
          const result = renderSeries({
            dir: args.dir,
            mode: args.mode,
            outDir: args.out,
            colormap: args.colormap,
            scaling: args.scaling,
            pixelScale: args.scale,
          });
          for (const err of result.errors) {
            process.stderr.write(`error: ${err.file}: ${err.message}\n`);
            status = 1;
          }
          process.stdout.write(`wrote ${result.written.length} image(s) to ${args.out}\n`);
          if (result.written.length === 0) {
            status = 1;
          }
          const diagPath = join(args.dir, "diagnostics.csv");
          if (existsSync(diagPath)) {
            try {
              const summary = summarizeDiagnostics(readDiagnostics(diagPath));
              if (summary) {
                process.stdout.write(`diagnostics: ${summary}\n`);
              }
            } catch (err) {
              process.stderr.write(`warning: ${(err as Error).message}\n`);
            }
          }
        } catch (err) {
          process.stderr.write(`error: ${(err as Error).message}\n`);
          status = 1;
        }
      },
    )
    .demandCommand(1, "specify a command (plot)")
    .strict()
    .fail((msg, err) => {
      process.stderr.write(`error: ${msg ?? err?.message}\n`);
      status = 1;
    })
    .exitProcess(false)
    .version("0.1.0")
    .help()
    .parseSync();
  return status;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("txcs-plot")) {
  process.exit(main(hideBin(process.argv)));
}
