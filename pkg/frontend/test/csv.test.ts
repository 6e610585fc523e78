import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  detectKind, parseConvergenceCsv, parseFieldsCsv,
} from "../src/csv.js";

const fixture = (name: string) =>
  readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf8");

describe("kind detection", () => {
  it("recognises a convergence table header", () => {
    const text = fixture("hetero_cgls_constrained_q2.csv");
    expect(detectKind(text, "t")).toBe("convergence");
  });

  it("recognises a field dump header", () => {
    const text = fixture("fields_constrained_cgls_n8.csv");
    expect(detectKind(text, "t")).toBe("fields");
  });

  it("rejects an unrelated header", () => {
    expect(() => detectKind("a,b,c\n1,2,3\n", "t")).toThrow(/header/);
  });

  it("rejects empty text", () => {
    expect(() => detectKind("", "t")).toThrow();
  });
});

describe("convergence table parsing", () => {
  it("parses every row with numeric fields", () => {
    const rows = parseConvergenceCsv(
      fixture("hetero_cgls_constrained_q2.csv"), "t");
    expect(rows).toHaveLength(4);
    expect(rows[0].method).toBe("cgls");
    expect(rows[0].order).toBe(2);
    expect(rows[0].interface_mode).toBe("constrained");
    expect(rows.map((r) => r.n)).toEqual([4, 8, 16, 32]);
    expect(rows[0].h).toBeCloseTo(0.5, 12);
    for (const row of rows) {
      expect(row.err_u).toBeGreaterThan(0);
    }
  });

  it("leaves the coarsest-mesh rates empty", () => {
    const rows = parseConvergenceCsv(
      fixture("hetero_cgls_constrained_q2.csv"), "t");
    expect(rows[0].rate_u).toBeNull();
    expect(rows[1].rate_u).not.toBeNull();
  });

  it("rejects a header-only table", () => {
    const header = "method,order,interface_mode,n,h,err_p,err_u,err_divu,"
      + "rate_p,rate_u,rate_divu\n";
    expect(() => parseConvergenceCsv(header, "t")).toThrow(/no data rows/);
  });

  it("rejects non-numeric error entries", () => {
    const text = "method,order,interface_mode,n,h,err_p,err_u,err_divu,"
      + "rate_p,rate_u,rate_divu\n"
      + "cgls,1,continuous,4,0.5,oops,1.0,1.0,,,\n";
    expect(() => parseConvergenceCsv(text, "t")).toThrow(/err_p/);
  });

  it("rejects a missing column", () => {
    const text = "method,order,n,h,err_p,err_u,err_divu,"
      + "rate_p,rate_u,rate_divu\n"
      + "cgls,1,4,0.5,1.0,1.0,1.0,,,\n";
    expect(() => parseConvergenceCsv(text, "t")).toThrow();
  });
});

describe("field dump parsing", () => {
  it("parses coordinates, components and side labels", () => {
    const rows = parseFieldsCsv(fixture("fields_constrained_cgls_n8.csv"),
      "t");
    expect(rows).toHaveLength(90);
    for (const row of rows) {
      expect([1, 2]).toContain(row.side);
      expect(Number.isFinite(row.uy)).toBe(true);
    }
    const atInterface = rows.filter((r) => r.x === 0);
    expect(atInterface).toHaveLength(18);
  });

  it("rejects a dump without the side column", () => {
    const text = "x,y,ux,uy,p\n0.0,0.0,1.0,1.0,1.0\n";
    expect(() => parseFieldsCsv(text, "t")).toThrow();
  });
});
