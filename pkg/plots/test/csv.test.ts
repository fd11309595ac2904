import * as fs from "node:fs";
import * as path from "node:path";

import { describe, expect, it } from "vitest";

import { SchemaError, readResults, readSummary } from "../src/csv";

const FIXTURES = path.join(__dirname, "fixtures");

function fixture(name: string): string {
  return fs.readFileSync(path.join(FIXTURES, name), "utf-8");
}

describe("readResults", () => {
  it("reads a real harness results file", () => {
    const rows = readResults(fixture("results_two_policies.csv"), "results.csv");
    expect(rows.length).toBeGreaterThan(0);
    const policies = new Set(rows.map((r) => r.policy));
    expect(policies).toEqual(new Set(["klucb", "ucb1"]));
    expect(rows.every((r) => Number.isFinite(r.cumRegret))).toBe(true);
  });

  it("names missing columns", () => {
    const text = fixture("results_two_policies.csv");
    const lines = text.split("\n");
    lines[0] = lines[0].replace(",cum_regret", "");
    expect(() => readResults(lines.join("\n"), "broken.csv")).toThrow(
      /broken\.csv: missing columns: cum_regret/,
    );
  });

  it("rejects reordered columns", () => {
    const text = fixture("results_two_policies.csv");
    const lines = text.split("\n");
    const cols = lines[0].split(",");
    [cols[0], cols[1]] = [cols[1], cols[0]];
    lines[0] = cols.join(",");
    expect(() => readResults(lines.join("\n"), "swapped.csv")).toThrow(SchemaError);
  });
});

describe("readSummary", () => {
  it("reads a sweep summary with per-policy fits", () => {
    const rows = readSummary(fixture("summary_ksweep.csv"), "summary.csv");
    expect(rows.length).toBe(6); // 2 policies x 3 axis values
    expect(new Set(rows.map((r) => r.axis))).toEqual(new Set(["K"]));
    expect(rows.every((r) => r.fitExponent !== null)).toBe(true);
  });

  it("treats empty fit columns as absent", () => {
    const text = fixture("summary_ksweep.csv");
    const lines = text.split("\n");
    const cells = lines[1].split(",");
    cells[13] = "";
    cells[14] = "";
    lines[1] = cells.join(",");
    const rows = readSummary(lines.join("\n"), "summary.csv");
    expect(rows[0].fitExponent).toBeNull();
  });
});
