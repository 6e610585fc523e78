/** Minimal SVG document assembly: axes, polylines, markers, text. */

export interface Extent {
  min: number;
  max: number;
}

export interface Frame {
  width: number;
  height: number;
  margin: { left: number; right: number; top: number; bottom: number };
  x: Extent;
  y: Extent;
}

export function padExtent(values: number[], fraction = 0.06): Extent {
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (!Number.isFinite(min) || !Number.isFinite(max)) {
    throw new Error("cannot build an axis from non-finite values");
  }
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const pad = (max - min) * fraction;
  return { min: min - pad, max: max + pad };
}

export function xPixel(frame: Frame, v: number): number {
  const span = frame.width - frame.margin.left - frame.margin.right;
  return frame.margin.left
    + ((v - frame.x.min) / (frame.x.max - frame.x.min)) * span;
}

export function yPixel(frame: Frame, v: number): number {
  const span = frame.height - frame.margin.top - frame.margin.bottom;
  return frame.height - frame.margin.bottom
    - ((v - frame.y.min) / (frame.y.max - frame.y.min)) * span;
}

/** Round tick positions covering an extent at unit spacing scaled by step. */
export function ticks(extent: Extent, step: number): number[] {
  const out: number[] = [];
  const start = Math.ceil(extent.min / step) * step;
  for (let v = start; v <= extent.max + 1e-12; v += step) {
    out.push(Number(v.toFixed(10)));
  }
  return out;
}

const esc = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function polyline(points: [number, number][], style: string): string {
  const pts = points.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`)
    .join(" ");
  return `<polyline fill="none" points="${pts}" ${style}/>`;
}

export function circle(x: number, y: number, r: number, fill: string): string {
  return `<circle cx="${x.toFixed(2)}" cy="${y.toFixed(2)}" r="${r}" ` +
    `fill="${fill}"/>`;
}

export function text(x: number, y: number, content: string,
    attrs = ""): string {
  return `<text x="${x.toFixed(2)}" y="${y.toFixed(2)}" ` +
    `font-family="sans-serif" font-size="12" ${attrs}>` +
    `${esc(content)}</text>`;
}

export function line(x1: number, y1: number, x2: number, y2: number,
    style: string): string {
  return `<line x1="${x1.toFixed(2)}" y1="${y1.toFixed(2)}" ` +
    `x2="${x2.toFixed(2)}" y2="${y2.toFixed(2)}" ${style}/>`;
}

/** Axes box with tick marks, tick labels and axis titles. */
export function axes(frame: Frame, xLabel: string, yLabel: string,
    xStep: number, yStep: number): string {
  const { margin, width, height } = frame;
  const left = margin.left;
  const right = width - margin.right;
  const top = margin.top;
  const bottom = height - margin.bottom;
  const out: string[] = [];
  out.push(`<rect x="${left}" y="${top}" width="${right - left}" ` +
    `height="${bottom - top}" fill="none" stroke="#444"/>`);
  for (const v of ticks(frame.x, xStep)) {
    const px = xPixel(frame, v);
    out.push(line(px, bottom, px, bottom + 5, 'stroke="#444"'));
    out.push(text(px, bottom + 18, String(v), 'text-anchor="middle"'));
  }
  for (const v of ticks(frame.y, yStep)) {
    const py = yPixel(frame, v);
    out.push(line(left - 5, py, left, py, 'stroke="#444"'));
    out.push(text(left - 8, py + 4, String(v), 'text-anchor="end"'));
  }
  out.push(text((left + right) / 2, height - 8, xLabel,
    'text-anchor="middle"'));
  out.push(`<g transform="rotate(-90 14 ${(top + bottom) / 2})">` +
    text(14, (top + bottom) / 2, yLabel, 'text-anchor="middle"') + "</g>");
  return out.join("\n");
}

export function document(width: number, height: number,
    body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    ...body,
    "</svg>",
  ].join("\n");
}

export const PALETTE = [
  "#1f6fb2", "#d1495b", "#2e8b57", "#8a5cb8", "#c87f2f", "#3b3b3b",
];
