import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { SUMMARY_COLUMNS, readSummary } from "../src/csv";
import { CliError } from "../src/curves";
import { buildScaling, plotScaling } from "../src/scaling";

const FIXTURES = path.join(__dirname, "fixtures");

let tmpDir: string;
beforeEach(() => {
  tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), "plots-"));
});
afterEach(() => {
  fs.rmSync(tmpDir, { recursive: true, force: true });
});

function loadSummary(name: string) {
  return readSummary(fs.readFileSync(path.join(FIXTURES, name), "utf-8"), name);
}

function syntheticSummary(points: Array<[number, number]>, fitExponent: string): string {
  const rows = points.map(
    ([x, y]) =>
      `r0,klucb,cascade,theorem3,16,2,2048,4,7,K,${x},${y},0.1,${fitExponent},1`,
  );
  return [SUMMARY_COLUMNS.join(","), ...rows].join("\n") + "\n";
}

describe("buildScaling", () => {
  it("recomputes exponents that agree with the harness fits", () => {
    const scalings = buildScaling(loadSummary("summary_ksweep.csv"));
    expect(scalings.map((s) => s.policy)).toEqual(["klucb", "ucb1"]);
    const stored = loadSummary("summary_ksweep.csv");
    for (const s of scalings) {
      const row = stored.find((r) => r.policy === s.policy)!;
      expect(Math.abs(s.exponent - row.fitExponent!)).toBeLessThanOrEqual(1e-6);
    }
  });

  it("annotated exponent matches an exact power-law summary to 1e-9", () => {
    // y = 2 x^0.5 exactly; the stored fit is the true exponent
    const text = syntheticSummary(
      [
        [1, 2],
        [4, 4],
        [16, 8],
      ],
      "0.5",
    );
    const scalings = buildScaling(readSummary(text, "synthetic.csv"));
    expect(Math.abs(scalings[0].exponent - 0.5)).toBeLessThanOrEqual(1e-9);
  });

  it("rejects a tampered fit_exponent column", () => {
    const text = syntheticSummary(
      [
        [1, 2],
        [4, 4],
        [16, 8],
      ],
      "0.75",
    );
    expect(() => buildScaling(readSummary(text, "tampered.csv"))).toThrow(
      /disagrees/,
    );
  });

  it("needs at least two points per policy", () => {
    const text = syntheticSummary([[4, 4]], "");
    expect(() => buildScaling(readSummary(text, "single.csv"))).toThrow(
      /at least 2/,
    );
  });

  it("rejects an empty policy filter match", () => {
    expect(() => buildScaling(loadSummary("summary_nsweep.csv"), "ucb1")).toThrow(
      /no rows/,
    );
  });
});

describe("plotScaling", () => {
  it("renders the K-sweep contrast figure (criterion-7-shaped input)", () => {
    const out = path.join(tmpDir, "ksweep.svg");
    plotScaling({ inputs: [path.join(FIXTURES, "summary_ksweep.csv")], out });
    const svg = fs.readFileSync(out, "utf-8");
    expect(svg).toContain("Terminal regret vs K");
    expect(svg).toMatch(/klucb: exponent -?\d+\.\d+/);
    expect(svg).toMatch(/ucb1: exponent -?\d+\.\d+/);
  });

  it("renders the n-sweep figure (criterion-6-shaped input)", () => {
    const out = path.join(tmpDir, "nsweep.svg");
    plotScaling({ inputs: [path.join(FIXTURES, "summary_nsweep.csv")], out });
    const svg = fs.readFileSync(out, "utf-8");
    expect(svg).toContain("Terminal regret vs n");
    expect(svg).toContain("klucb");
  });

  it("writes no file when the input is a single point", () => {
    const src = path.join(tmpDir, "single.csv");
    fs.writeFileSync(src, syntheticSummary([[4, 4]], ""));
    const out = path.join(tmpDir, "never.svg");
    expect(() => plotScaling({ inputs: [src], out })).toThrow(CliError);
    expect(fs.existsSync(out)).toBe(false);
  });
});
