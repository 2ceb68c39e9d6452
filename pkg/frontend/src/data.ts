import { readFileSync, existsSync } from "node:fs";
import Papa from "papaparse";
import { ResultRow, RunMetadata, SchemaError, checkColumns } from "./schema.js";

export interface ResultsFile {
  path: string;
  rows: ResultRow[];
  metadata: RunMetadata;
}

/** Load one sweep CSV plus its sibling <name>.metadata.json (if present). */
export function loadResults(csvPath: string): ResultsFile {
  const text = readFileSync(csvPath, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError([`parse error at row ${first.row}: ${first.message}`]);
  }
  checkColumns(parsed.meta.fields);
  const rows: ResultRow[] = parsed.data.map((r) => ({
    axis: r.axis,
    algorithm: r.algorithm,
    seed: Number(r.seed),
    profit: Number(r.profit),
    profit_norm: Number(r.profit_norm),
    mean_link_util: Number(r.mean_link_util),
    mean_node_util: Number(r.mean_node_util),
    J: Number(r.J),
    D: Number(r.D),
  }));
  if (rows.length === 0) {
    throw new SchemaError(["(no data rows)"]);
  }
  const metaPath = csvPath.replace(/\.csv$/, "") + ".metadata.json";
  let metadata: RunMetadata = {};
  if (existsSync(metaPath)) {
    metadata = JSON.parse(readFileSync(metaPath, "utf8"));
  }
  return { path: csvPath, rows, metadata };
}

export interface SeriesPoint {
  axis: string;
  mean: number;
  std: number;
  n: number;
}

/** Mean and stddev of a column per (axis value) for one algorithm's rows. */
export function aggregate(
  rows: ResultRow[],
  algorithm: string,
  column: keyof ResultRow = "profit_norm",
): SeriesPoint[] {
  const groups = new Map<string, number[]>();
  const order: string[] = [];
  for (const row of rows) {
    if (row.algorithm !== algorithm) continue;
    if (!groups.has(row.axis)) {
      groups.set(row.axis, []);
      order.push(row.axis);
    }
    groups.get(row.axis)!.push(Number(row[column]));
  }
  return order.map((axis) => {
    const vals = groups.get(axis)!;
    const mean = vals.reduce((a, b) => a + b, 0) / vals.length;
    const variance =
      vals.reduce((a, b) => a + (b - mean) * (b - mean), 0) / vals.length;
    return { axis, mean, std: Math.sqrt(variance), n: vals.length };
  });
}

export function algorithmsIn(rows: ResultRow[]): string[] {
  const seen: string[] = [];
  for (const row of rows) {
    if (!seen.includes(row.algorithm)) seen.push(row.algorithm);
  }
  return seen;
}
