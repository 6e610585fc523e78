/**
 * Log-log convergence figures from solver result tables.
 *
 * Points are placed at (-log10 h, log10 err) so a method converging at
 * O(h^s) traces a line of slope -s.  Dashed guide lines with those slopes
 * are anchored at the centroid of the plotted data for visual comparison.
 */

import { ConvergenceRow, Quantity, QUANTITIES } from "./csv.js";
import * as svg from "./svg.js";

export type Point = [number, number];

export function seriesKey(row: ConvergenceRow, prefix = ""): string {
  const base = `${row.method} ${row.interface_mode} Q${row.order}`;
  return prefix ? `${prefix}: ${base}` : base;
}

/** Group rows into series, each sorted from coarse to fine mesh. */
export function groupSeries(
  rows: ConvergenceRow[],
  prefix = "",
): Map<string, ConvergenceRow[]> {
  const out = new Map<string, ConvergenceRow[]>();
  for (const row of rows) {
    const key = seriesKey(row, prefix);
    const bucket = out.get(key);
    if (bucket) {
      bucket.push(row);
    } else {
      out.set(key, [row]);
    }
  }
  for (const bucket of out.values()) {
    bucket.sort((a, b) => b.h - a.h);
  }
  return out;
}

/** Map one series to plot coordinates (-log10 h, log10 err). */
export function toPoints(rows: ConvergenceRow[], quantity: Quantity): Point[] {
  if (!QUANTITIES.includes(quantity)) {
    throw new Error(`unknown quantity ${quantity}`);
  }
  return rows.map((row) => {
    const err = row[quantity];
    if (!(err > 0)) {
      throw new Error(
        `cannot plot ${quantity}=${err} on a log scale ` +
        `(method ${row.method}, n=${row.n})`,
      );
    }
    return [-Math.log10(row.h), Math.log10(err)];
  });
}

/** Least-squares slope of y against x. */
export function fitSlope(points: Point[]): number {
  if (points.length < 2) {
    throw new Error("need at least two points to fit a slope");
  }
  const n = points.length;
  const mx = points.reduce((s, p) => s + p[0], 0) / n;
  const my = points.reduce((s, p) => s + p[1], 0) / n;
  let num = 0;
  let den = 0;
  for (const [x, y] of points) {
    num += (x - mx) * (y - my);
    den += (x - mx) * (x - mx);
  }
  if (den === 0) {
    throw new Error("all points share one mesh size; slope is undefined");
  }
  return num / den;
}

/** Slope between the two finest meshes of a series. */
export function finestPairSlope(points: Point[]): number {
  if (points.length < 2) {
    throw new Error("need at least two points for a finest-pair slope");
  }
  const [x0, y0] = points[points.length - 2];
  const [x1, y1] = points[points.length - 1];
  return (y1 - y0) / (x1 - x0);
}

export interface ConvergenceFigureOptions {
  quantity: Quantity;
  slopes: number[];
  width?: number;
  height?: number;
}

/** Render one figure: one polyline per series plus slope guide lines. */
export function buildConvergenceFigure(
  series: Map<string, ConvergenceRow[]>,
  options: ConvergenceFigureOptions,
): string {
  const { quantity, slopes } = options;
  const width = options.width ?? 640;
  const height = options.height ?? 480;
  if (series.size === 0) {
    throw new Error("no series to plot");
  }
  const pointsByKey = new Map<string, Point[]>();
  for (const [key, rows] of series) {
    if (rows.length < 2) {
      throw new Error(`series ${key} has fewer than two meshes`);
    }
    pointsByKey.set(key, toPoints(rows, quantity));
  }
  const all: Point[] = [...pointsByKey.values()].flat();
  const frame: svg.Frame = {
    width,
    height,
    margin: { left: 64, right: 170, top: 24, bottom: 48 },
    x: svg.padExtent(all.map((p) => p[0])),
    y: svg.padExtent(all.map((p) => p[1])),
  };
  const cx = all.reduce((s, p) => s + p[0], 0) / all.length;
  const cy = all.reduce((s, p) => s + p[1], 0) / all.length;

  const body: string[] = [];
  body.push(svg.axes(frame, "-log10(h)", `log10(${quantity})`, 0.5, 1));

  for (const s of slopes) {
    const y0 = cy - (-s) * (cx - frame.x.min);
    const y1 = cy + (-s) * (frame.x.max - cx);
    const p0: Point = [svg.xPixel(frame, frame.x.min), svg.yPixel(frame, y0)];
    const p1: Point = [svg.xPixel(frame, frame.x.max), svg.yPixel(frame, y1)];
    body.push(svg.line(p0[0], p0[1], p1[0], p1[1],
      'stroke="#999" stroke-dasharray="6 4"'));
  }

  let i = 0;
  const legendX = width - frame.margin.right + 12;
  let legendY = frame.margin.top + 12;
  for (const [key, points] of pointsByKey) {
    const color = svg.PALETTE[i % svg.PALETTE.length];
    const px: Point[] = points.map(
      ([x, y]) => [svg.xPixel(frame, x), svg.yPixel(frame, y)],
    );
    body.push(svg.polyline(px, `stroke="${color}" stroke-width="1.6"`));
    for (const [x, y] of px) {
      body.push(svg.circle(x, y, 3.2, color));
    }
    body.push(svg.line(legendX, legendY - 4, legendX + 18, legendY - 4,
      `stroke="${color}" stroke-width="1.6"`));
    body.push(svg.text(legendX + 24, legendY, key));
    legendY += 18;
    i += 1;
  }
  for (const s of slopes) {
    body.push(svg.line(legendX, legendY - 4, legendX + 18, legendY - 4,
      'stroke="#999" stroke-dasharray="6 4"'));
    body.push(svg.text(legendX + 24, legendY, `slope ${s}`));
    legendY += 18;
  }
  return svg.document(width, height, body);
}
