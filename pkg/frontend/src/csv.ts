/**
 * Loading of the calculator CLI's CSV artifacts.
 *
 * Every figure CSV is a numeric table with a header row. The renderer
 * never recomputes physics: these tables are the single source of truth.
 */

import { readFileSync, existsSync } from "node:fs";
import { join } from "node:path";
import { csvParseRows } from "d3-dsv";

export class MissingFileError extends Error {
  constructor(public readonly path: string) {
    super(`missing data file: ${path}`);
    this.name = "MissingFileError";
  }
}

export class MissingColumnError extends Error {
  constructor(public readonly path: string, public readonly column: string) {
    super(`column '${column}' not found in ${path}`);
    this.name = "MissingColumnError";
  }
}

export interface NumericTable {
  readonly path: string;
  readonly columns: string[];
  readonly rows: number[][];
}

/** Read one CSV file into a numeric table, preserving row order. */
export function loadTable(dir: string, name: string): NumericTable {
  const path = join(dir, name);
  if (!existsSync(path)) {
    throw new MissingFileError(path);
  }
  const raw = csvParseRows(readFileSync(path, "utf-8").trim());
  const columns = raw[0] ?? [];
  const rows = raw.slice(1).map((cells) => cells.map(Number));
  return { path, columns, rows };
}

/** Extract a named column, failing loudly if the header lacks it. */
export function column(table: NumericTable, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new MissingColumnError(table.path, name);
  }
  return table.rows.map((r) => r[idx]);
}

/** (x, y) pairs from two named columns of the same table. */
export function series(
  table: NumericTable,
  x: string,
  y: string,
): Array<[number, number]> {
  const xs = column(table, x);
  const ys = column(table, y);
  return xs.map((v, i) => [v, ys[i]]);
}
