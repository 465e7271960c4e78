/**
 * Reader for the per-record diagnostics table written next to a
 * snapshot series (diagnostics.csv). Columns are numeric; the header
 * row names them. Only light interpretation happens here: the CLI
 * prints a one-line summary of the run (final time, tumor mass drift,
 * worst negativity) when the table is present.
 */

import { readFileSync } from "node:fs";

import Papa from "papaparse";

export interface DiagnosticsTable {
  columns: string[];
  rows: Record<string, number>[];
}

/** Python float repr spells infinities "inf"/"-inf"; Number() cannot. */
function parseCell(text: string | undefined): number {
  switch (text) {
    case "inf":
      return Infinity;
    case "-inf":
      return -Infinity;
    default:
      return Number(text);
  }
}

export function parseDiagnostics(text: string): DiagnosticsTable {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`diagnostics CSV parse error: ${first.message} (row ${first.row})`);
  }
  const columns = parsed.meta.fields ?? [];
  if (!columns.includes("t")) {
    throw new Error("diagnostics CSV has no 't' column");
  }
  const rows = parsed.data.map((raw) => {
    const row: Record<string, number> = {};
    for (const name of columns) {
      row[name] = parseCell(raw[name]);
    }
    return row;
  });
  return { columns, rows };
}

export function readDiagnostics(path: string): DiagnosticsTable {
  return parseDiagnostics(readFileSync(path, "utf8"));
}

/** One-line human summary of a diagnostics table; "" for empty tables. */
export function summarizeDiagnostics(table: DiagnosticsTable): string {
  if (table.rows.length === 0) {
    return "";
  }
  const first = table.rows[0];
  const last = table.rows[table.rows.length - 1];
  const parts = [`${table.rows.length} records`, `t=${first.t}..${last.t}`];
  if ("mass_u" in last && first.mass_u !== 0) {
    const drift = Math.abs(last.mass_u - first.mass_u) / Math.abs(first.mass_u);
    parts.push(`mass_u drift ${drift.toExponential(3)}`);
  }
  if ("negativity_excess" in last) {
    const worst = Math.max(...table.rows.map((r) => r.negativity_excess));
    parts.push(`worst negativity ${worst.toExponential(3)}`);
  }
  return parts.join(", ");
}
