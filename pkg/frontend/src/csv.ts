/** Parsing and validation of the solver's two CSV schemas. */

import Papa from "papaparse";

export const CONVERGENCE_COLUMNS = [
  "method", "order", "interface_mode", "n", "h",
  "err_p", "err_u", "err_divu", "rate_p", "rate_u", "rate_divu",
] as const;

export const FIELD_COLUMNS = ["x", "y", "ux", "uy", "p", "side"] as const;

export const QUANTITIES = ["err_p", "err_u", "err_divu"] as const;
export type Quantity = (typeof QUANTITIES)[number];

export interface ConvergenceRow {
  method: string;
  order: number;
  interface_mode: string;
  n: number;
  h: number;
  err_p: number;
  err_u: number;
  err_divu: number;
  rate_p: number | null;
  rate_u: number | null;
  rate_divu: number | null;
}

export interface FieldRow {
  x: number;
  y: number;
  ux: number;
  uy: number;
  p: number;
  side: number;
}

export type CsvKind = "convergence" | "fields";

function parseRows(text: string, label: string): Record<string, string>[] {
  const out = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (out.errors.length > 0) {
    const first = out.errors[0];
    throw new Error(`${label}: CSV parse error: ${first.message}`);
  }
  return out.data;
}

function headerOf(text: string): string[] {
  const firstLine = text.split(/\r?\n/, 1)[0] ?? "";
  return firstLine.split(",").map((s) => s.trim());
}

/** Decide which schema a CSV carries from its header line. */
export function detectKind(text: string, label: string): CsvKind {
  const header = headerOf(text);
  const hasAll = (cols: readonly string[]) =>
    cols.every((c) => header.includes(c));
  if (hasAll(CONVERGENCE_COLUMNS)) return "convergence";
  if (hasAll(FIELD_COLUMNS)) return "fields";
  throw new Error(
    `${label}: unrecognized CSV header "${header.join(",")}"; expected ` +
    `convergence columns (${CONVERGENCE_COLUMNS.join(",")}) or field ` +
    `columns (${FIELD_COLUMNS.join(",")})`,
  );
}

function num(value: string | undefined, column: string, label: string): number {
  const v = Number(value);
  if (value === undefined || value === "" || !Number.isFinite(v)) {
    throw new Error(`${label}: bad numeric value "${value}" in ${column}`);
  }
  return v;
}

function numOrNull(value: string | undefined): number | null {
  if (value === undefined || value === "") return null;
  const v = Number(value);
  return Number.isFinite(v) ? v : null;
}

export function parseConvergenceCsv(text: string, label = "input"):
    ConvergenceRow[] {
  if (detectKind(text, label) !== "convergence") {
    throw new Error(`${label}: not a convergence CSV`);
  }
  const rows = parseRows(text, label).map((r) => ({
    method: r.method ?? "",
    order: num(r.order, "order", label),
    interface_mode: r.interface_mode ?? "",
    n: num(r.n, "n", label),
    h: num(r.h, "h", label),
    err_p: num(r.err_p, "err_p", label),
    err_u: num(r.err_u, "err_u", label),
    err_divu: num(r.err_divu, "err_divu", label),
    rate_p: numOrNull(r.rate_p),
    rate_u: numOrNull(r.rate_u),
    rate_divu: numOrNull(r.rate_divu),
  }));
  if (rows.length === 0) {
    throw new Error(`${label}: convergence CSV has no data rows`);
  }
  return rows;
}

export function parseFieldsCsv(text: string, label = "input"): FieldRow[] {
  if (detectKind(text, label) !== "fields") {
    throw new Error(`${label}: not a field-dump CSV`);
  }
  const rows = parseRows(text, label).map((r) => ({
    x: num(r.x, "x", label),
    y: num(r.y, "y", label),
    ux: num(r.ux, "ux", label),
    uy: num(r.uy, "uy", label),
    p: num(r.p, "p", label),
    side: num(r.side, "side", label),
  }));
  if (rows.length === 0) {
    throw new Error(`${label}: field-dump CSV has no data rows`);
  }
  return rows;
}
