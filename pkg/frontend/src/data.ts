/**
 * Readers for the experiment runner's exported artifacts: trace.csv
 * (thinned cumulative regret series) and report.json (fitted orders).
 * These files are the only interface to the simulation package.
 */

import { readFileSync, readdirSync, statSync } from "node:fs";
import { join } from "node:path";

export interface TracePoint {
  t: number;
  mean: number;
  std: number;
  functionalMean: number;
}

export interface Report {
  aggregate_slope: number;
  aggregate_stderr: number;
  failures: number;
  config?: Record<string, unknown>;
  [key: string]: unknown;
}

export interface ResultCell {
  /** Directory name, e.g. "dbgd_a0.25_rho0.5". */
  name: string;
  trace: TracePoint[];
  report: Report;
}

export interface SummaryRow {
  cell: string;
  algorithm: string;
  alpha: number | null;
  rho: number | null;
  slope: number;
}

const TRACE_HEADER = "t,cum_dueling_mean,cum_dueling_std,cum_functional_mean";

export function parseTraceCsv(text: string): TracePoint[] {
  const lines = text.trim().split("\n");
  if (lines.length < 2) {
    throw new Error("trace CSV has no data rows");
  }
  if (lines[0].trim() !== TRACE_HEADER) {
    throw new Error(`unexpected trace CSV header: ${lines[0]}`);
  }
  return lines.slice(1).map((line, i) => {
    const cols = line.split(",");
    if (cols.length !== 4) {
      throw new Error(`trace CSV row ${i + 1} has ${cols.length} columns, expected 4`);
    }
    const [t, mean, std, functionalMean] = cols.map(Number);
    if ([t, mean, std, functionalMean].some((v) => Number.isNaN(v))) {
      throw new Error(`trace CSV row ${i + 1} contains a non-numeric value`);
    }
    return { t, mean, std, functionalMean };
  });
}

export function readCell(dir: string, name: string): ResultCell {
  const trace = parseTraceCsv(readFileSync(join(dir, "trace.csv"), "utf8"));
  const report = JSON.parse(readFileSync(join(dir, "report.json"), "utf8")) as Report;
  if (typeof report.aggregate_slope !== "number") {
    throw new Error(`report.json in ${dir} has no aggregate_slope`);
  }
  return { name, trace, report };
}

/**
 * Discover result cells under a directory: either a sweep layout
 * (summary.json plus one subdirectory per cell) or a single run
 * (trace.csv + report.json at the top level).
 */
export function discoverCells(root: string): ResultCell[] {
  const entries = readdirSync(root);
  if (entries.includes("trace.csv")) {
    return [readCell(root, "run")];
  }
  const cells: ResultCell[] = [];
  for (const entry of entries.sort()) {
    const sub = join(root, entry);
    if (statSync(sub).isDirectory() && readdirSync(sub).includes("trace.csv")) {
      cells.push(readCell(sub, entry));
    }
  }
  if (cells.length === 0) {
    throw new Error(`no trace.csv found under ${root}`);
  }
  return cells;
}

/** Group sweep cells into one panel per algorithm ("<alg>_rho<rho>" names). */
export function groupByAlgorithm(cells: ResultCell[]): Map<string, ResultCell[]> {
  const groups = new Map<string, ResultCell[]>();
  for (const cell of cells) {
    const m = cell.name.match(/^(.*?)_rho[-\d.]+$/);
    const key = m ? m[1] : cell.name;
    const bucket = groups.get(key) ?? [];
    bucket.push(cell);
    groups.set(key, bucket);
  }
  return groups;
}
