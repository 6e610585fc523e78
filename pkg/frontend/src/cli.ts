#!/usr/bin/env node
/**
 * Render SVG figures from solver CSV output.
 *
 * Usage:
 *   plotviz results/study.csv [more.csv ...] [--quantity err_u]
 *           [--slopes 0.5,1,2,3] [--out figure.svg]
 *   plotviz results/fields.csv [--gamma 1.0] [--out figure.svg]
 *
 * The input kind is detected from the CSV header: convergence tables
 * become log-log error plots, nodal field dumps become interface-trace
 * plots.  The tool only reads CSVs; it never runs solves.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";
import { parseArgs } from "node:util";

import {
  detectKind, parseConvergenceCsv, parseFieldsCsv, Quantity, QUANTITIES,
} from "./csv.js";
import { buildConvergenceFigure, groupSeries } from "./convergence.js";
import { buildProfileFigure } from "./profile.js";

export interface CliOptions {
  inputs: string[];
  quantity: Quantity;
  slopes: number[];
  gamma: number;
  out: string;
}

export function parseCliArgs(argv: string[]): CliOptions {
  const { values, positionals } = parseArgs({
    args: argv,
    allowPositionals: true,
    options: {
      quantity: { type: "string", default: "err_u" },
      slopes: { type: "string", default: "0.5,1,2,3" },
      gamma: { type: "string", default: "1" },
      out: { type: "string" },
    },
  });
  if (positionals.length === 0) {
    throw new Error("at least one input CSV path is required");
  }
  const quantity = values.quantity as string;
  if (!QUANTITIES.includes(quantity as Quantity)) {
    throw new Error(
      `unknown quantity ${quantity}; expected one of ${QUANTITIES.join(", ")}`,
    );
  }
  const slopes = (values.slopes as string).split(",").map((part) => {
    const s = Number(part);
    if (!Number.isFinite(s)) {
      throw new Error(`bad slope value ${part}`);
    }
    return s;
  });
  const gamma = Number(values.gamma);
  if (!Number.isFinite(gamma) || gamma <= 0) {
    throw new Error(`contrast parameter must be positive, got ${values.gamma}`);
  }
  const out = values.out
    ?? positionals[0].replace(/\.csv$/i, "") + ".svg";
  return {
    inputs: positionals,
    quantity: quantity as Quantity,
    slopes,
    gamma,
    out,
  };
}

/** Build the figure for the given options; returns the SVG text. */
export function renderFigure(options: CliOptions): string {
  const texts = options.inputs.map((path) => ({
    path,
    text: readFileSync(path, "utf8"),
  }));
  const kinds = texts.map(({ path, text }) => detectKind(text, path));
  const kind = kinds[0];
  if (kinds.some((k) => k !== kind)) {
    throw new Error("cannot mix convergence tables and field dumps");
  }
  if (kind === "fields") {
    if (texts.length !== 1) {
      throw new Error("interface-trace plots take exactly one field dump");
    }
    const rows = parseFieldsCsv(texts[0].text, texts[0].path);
    return buildProfileFigure(rows, { gamma: options.gamma });
  }
  const series = new Map<string, import("./csv.js").ConvergenceRow[]>();
  for (const { path, text } of texts) {
    const prefix = texts.length > 1
      ? basename(path).replace(/\.csv$/i, "")
      : "";
    for (const [key, rows] of groupSeries(
        parseConvergenceCsv(text, path), prefix)) {
      if (series.has(key)) {
        throw new Error(`duplicate series ${key} across inputs`);
      }
      series.set(key, rows);
    }
  }
  return buildConvergenceFigure(series, {
    quantity: options.quantity,
    slopes: options.slopes,
  });
}

export function main(argv: string[]): number {
  let options: CliOptions;
  let figure: string;
  try {
    options = parseCliArgs(argv);
    figure = renderFigure(options);
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
  writeFileSync(options.out, figure, "utf8");
  process.stdout.write(`wrote ${options.out}\n`);
  return 0;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("cli.ts")) {
  process.exit(main(process.argv.slice(2)));
}
