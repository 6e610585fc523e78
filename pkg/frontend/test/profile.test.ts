import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { FieldRow, parseFieldsCsv } from "../src/csv.js";
import {
  buildProfileFigure, exactTraceSide1, exactTraceSide2, interfaceProfiles,
  sampleExact,
} from "../src/profile.js";

const fixture = (name: string) =>
  readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf8");

describe("dual-sided constrained dump", () => {
  const rows = parseFieldsCsv(fixture("fields_constrained_cgls_n8.csv"), "t");
  const profiles = interfaceProfiles(rows);

  it("extracts one trace per side, sorted by y", () => {
    expect(profiles.side1).toHaveLength(9);
    expect(profiles.side2).toHaveLength(9);
    for (const side of [profiles.side1, profiles.side2]) {
      for (let i = 1; i < side.length; i += 1) {
        expect(side[i].y).toBeGreaterThan(side[i - 1].y);
      }
    }
  });

  it("matches the analytic one-sided traces", () => {
    for (const { y, uy } of profiles.side1) {
      expect(Math.abs(uy - exactTraceSide1(y))).toBeLessThan(0.1);
    }
    for (const { y, uy } of profiles.side2) {
      expect(Math.abs(uy - exactTraceSide2(y, 1))).toBeLessThan(0.1);
    }
  });

  it("shows two clearly distinct curves", () => {
    let maxGap = 0;
    for (let i = 0; i < profiles.side1.length; i += 1) {
      expect(profiles.side1[i].y).toBeCloseTo(profiles.side2[i].y, 12);
      maxGap = Math.max(maxGap,
        Math.abs(profiles.side1[i].uy - profiles.side2[i].uy));
    }
    expect(maxGap).toBeGreaterThan(1);
  });

  it("renders both computed curves and both exact overlays", () => {
    const figure = buildProfileFigure(rows, { gamma: 1 });
    expect(figure.startsWith("<svg")).toBe(true);
    expect(figure).toContain("computed side 1");
    expect(figure).toContain("computed side 2");
    expect(figure).toContain("exact side 1");
    expect(figure).toContain("exact side 2");
  });
});

describe("single-sided continuous dump", () => {
  const rows = parseFieldsCsv(fixture("fields_continuous_cgls_n8.csv"), "t");
  const profiles = interfaceProfiles(rows);

  it("yields a single curve", () => {
    expect(profiles.side1).toHaveLength(0);
    expect(profiles.side2).toHaveLength(9);
  });

  it("lies between the two one-sided analytic traces", () => {
    for (const { y, uy } of profiles.side2) {
      const e1 = exactTraceSide1(y);
      const e2 = exactTraceSide2(y, 1);
      const mid = 0.5 * (e1 + e2);
      const half = 0.5 * Math.abs(e1 - e2);
      expect(Math.abs(uy - mid)).toBeLessThanOrEqual(half + 1e-9);
    }
  });

  it("renders only the available curve", () => {
    const figure = buildProfileFigure(rows, { gamma: 1 });
    expect(figure).toContain("computed side 2");
    expect(figure).not.toContain("computed side 1");
  });
});

describe("homogeneous medium dump", () => {
  const trace = (side: 1 | 2): FieldRow[] =>
    [-1, -0.5, 0, 0.5, 1].map((y) => ({
      x: 0, y, ux: 0.3 * y, uy: -Math.cos(y), p: y, side,
    }));
  const rows = [...trace(1), ...trace(2)];

  it("produces coinciding sides when the material does not jump", () => {
    const profiles = interfaceProfiles(rows);
    expect(profiles.side1).toHaveLength(5);
    for (let i = 0; i < profiles.side1.length; i += 1) {
      expect(profiles.side1[i].uy).toBe(profiles.side2[i].uy);
      expect(profiles.side1[i].uy).toBeCloseTo(
        exactTraceSide1(profiles.side1[i].y), 12);
    }
  });
});

describe("exact trace sampling", () => {
  it("covers y in [-1, 1] with the requested resolution", () => {
    const exact = sampleExact(2.5, 101);
    expect(exact.side1).toHaveLength(101);
    expect(exact.side1[0].y).toBe(-1);
    expect(exact.side1[100].y).toBe(1);
    expect(exact.side2[50].uy).toBeCloseTo(-2.5 * 2, 12);
  });
});

describe("degenerate dumps", () => {
  it("rejects a dump with no interface rows", () => {
    const rows: FieldRow[] = [
      { x: 0.5, y: 0, ux: 1, uy: 1, p: 1, side: 2 },
    ];
    expect(() => interfaceProfiles(rows)).toThrow(/interface/);
  });

  it("rejects an unknown side label on the interface", () => {
    const rows = [{ x: 0, y: 0, ux: 1, uy: 1, p: 1, side: 3 as 1 }];
    expect(() => interfaceProfiles(rows)).toThrow(/side/);
  });
});
