/** Regret-vs-round curves: one mean curve per policy with stderr bands. */

import * as fs from "node:fs";

import { ResultRow, readResults } from "./csv";
import { Series, renderPlot } from "./svg";

export class CliError extends Error {}

export interface CurvesSpec {
  inputs: string[];
  out: string;
  policy?: string;
  logX?: boolean;
  logY?: boolean;
}

export function buildCurveSeries(rows: ResultRow[], policy?: string): Series[] {
  const filtered = policy ? rows.filter((r) => r.policy === policy) : rows;
  if (filtered.length === 0) {
    throw new CliError(policy ? `no rows match policy '${policy}'` : "no rows in input");
  }
  const byPolicy = new Map<string, Map<number, number[]>>();
  for (const row of filtered) {
    let checkpoints = byPolicy.get(row.policy);
    if (!checkpoints) byPolicy.set(row.policy, (checkpoints = new Map()));
    let values = checkpoints.get(row.checkpointRound);
    if (!values) checkpoints.set(row.checkpointRound, (values = []));
    values.push(row.cumRegret);
  }
  const series: Series[] = [];
  for (const [name, checkpoints] of [...byPolicy.entries()].sort()) {
    const rounds = [...checkpoints.keys()].sort((a, b) => a - b);
    const points: Array<[number, number]> = [];
    const band: Array<[number, number, number]> = [];
    for (const round of rounds) {
      const values = checkpoints.get(round)!;
      const mean = values.reduce((a, b) => a + b, 0) / values.length;
      let stderr = 0;
      if (values.length > 1) {
        const varSum = values.reduce((a, b) => a + (b - mean) * (b - mean), 0);
        stderr = Math.sqrt(varSum / (values.length - 1)) / Math.sqrt(values.length);
      }
      points.push([round, mean]);
      band.push([round, mean - stderr, mean + stderr]);
    }
    series.push({ label: name, points, band });
  }
  return series;
}

export function plotRegretCurves(spec: CurvesSpec): void {
  const rows = spec.inputs.flatMap((path) =>
    readResults(fs.readFileSync(path, "utf-8"), path),
  );
  const series = buildCurveSeries(rows, spec.policy);
  const svg = renderPlot(series, {
    title: "Cumulative regret",
    xLabel: "round",
    yLabel: "mean cumulative regret",
    logX: spec.logX,
    logY: spec.logY,
  });
  fs.writeFileSync(spec.out, svg, "utf-8");
}
