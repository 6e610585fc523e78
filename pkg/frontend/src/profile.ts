/**
 * Interface-trace figures from nodal field dumps.
 *
 * The tangential velocity component u_y is plotted against y along the
 * material interface x = 0.  Dual-row dumps carry one row per side at each
 * interface node, so the two one-sided traces appear as separate curves;
 * single-sided dumps produce one curve.  Analytic traces for the
 * heterogeneous benchmark, -cos(y) on side 1 and -g(sin y + 2 cos y) on
 * side 2 with contrast parameter g, are overlaid for comparison.
 */

import { FieldRow } from "./csv.js";
import * as svg from "./svg.js";

export interface TracePoint {
  y: number;
  uy: number;
}

export interface InterfaceProfiles {
  side1: TracePoint[];
  side2: TracePoint[];
}

const AT_INTERFACE = 1e-12;

/** Extract per-side u_y traces along x = 0, sorted by y. */
export function interfaceProfiles(rows: FieldRow[]): InterfaceProfiles {
  const side1: TracePoint[] = [];
  const side2: TracePoint[] = [];
  for (const row of rows) {
    if (Math.abs(row.x) > AT_INTERFACE) {
      continue;
    }
    const point = { y: row.y, uy: row.uy };
    if (row.side === 1) {
      side1.push(point);
    } else if (row.side === 2) {
      side2.push(point);
    } else {
      throw new Error(`unexpected side label ${row.side} at x=0`);
    }
  }
  if (side1.length === 0 && side2.length === 0) {
    throw new Error("field dump has no rows on the interface x = 0");
  }
  const byY = (a: TracePoint, b: TracePoint) => a.y - b.y;
  side1.sort(byY);
  side2.sort(byY);
  return { side1, side2 };
}

export function exactTraceSide1(y: number): number {
  return -Math.cos(y);
}

export function exactTraceSide2(y: number, gamma: number): number {
  return -gamma * (Math.sin(y) + 2 * Math.cos(y));
}

export function sampleExact(
  gamma: number,
  samples = 201,
): { side1: TracePoint[]; side2: TracePoint[] } {
  const side1: TracePoint[] = [];
  const side2: TracePoint[] = [];
  for (let i = 0; i < samples; i += 1) {
    const y = -1 + (2 * i) / (samples - 1);
    side1.push({ y, uy: exactTraceSide1(y) });
    side2.push({ y, uy: exactTraceSide2(y, gamma) });
  }
  return { side1, side2 };
}

export interface ProfileFigureOptions {
  gamma: number;
  samples?: number;
  width?: number;
  height?: number;
}

/** Render computed one-sided traces with the analytic curves overlaid. */
export function buildProfileFigure(
  rows: FieldRow[],
  options: ProfileFigureOptions,
): string {
  const width = options.width ?? 640;
  const height = options.height ?? 480;
  const profiles = interfaceProfiles(rows);
  const exact = sampleExact(options.gamma, options.samples ?? 201);

  const ys = [
    ...profiles.side1, ...profiles.side2, ...exact.side1, ...exact.side2,
  ];
  const frame: svg.Frame = {
    width,
    height,
    margin: { left: 64, right: 210, top: 24, bottom: 48 },
    x: svg.padExtent(ys.map((p) => p.y)),
    y: svg.padExtent(ys.map((p) => p.uy)),
  };
  const toPx = (p: TracePoint): [number, number] =>
    [svg.xPixel(frame, p.y), svg.yPixel(frame, p.uy)];

  const body: string[] = [];
  body.push(svg.axes(frame, "y", "u_y at x = 0", 0.5, 0.5));

  const legendX = width - frame.margin.right + 12;
  let legendY = frame.margin.top + 12;
  const legend = (style: string, label: string) => {
    body.push(svg.line(legendX, legendY - 4, legendX + 18, legendY - 4,
      style));
    body.push(svg.text(legendX + 24, legendY, label));
    legendY += 18;
  };

  body.push(svg.polyline(exact.side1.map(toPx),
    'stroke="#444" stroke-dasharray="5 4"'));
  body.push(svg.polyline(exact.side2.map(toPx),
    'stroke="#444" stroke-dasharray="2 3"'));
  legend('stroke="#444" stroke-dasharray="5 4"', "exact side 1");
  legend('stroke="#444" stroke-dasharray="2 3"', "exact side 2");

  const computed: [TracePoint[], string, string][] = [
    [profiles.side1, svg.PALETTE[0], "computed side 1"],
    [profiles.side2, svg.PALETTE[1], "computed side 2"],
  ];
  for (const [points, color, label] of computed) {
    if (points.length === 0) {
      continue;
    }
    const px = points.map(toPx);
    body.push(svg.polyline(px, `stroke="${color}" stroke-width="1.6"`));
    for (const [x, y] of px) {
      body.push(svg.circle(x, y, 3.2, color));
    }
    legend(`stroke="${color}" stroke-width="1.6"`, label);
  }
  return svg.document(width, height, body);
}
