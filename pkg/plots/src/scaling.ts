/**
 * Terminal-regret scaling plots from sweep summaries: log-log scatter per
 * policy with the fitted power law and its exponent annotated. The exponent
 * is recomputed here from the raw points and must agree with the harness's
 * stored fit to 1e-6; disagreement is an error, not a silent re-fit.
 */

import * as fs from "node:fs";

import { SummaryRow, readSummary } from "./csv";
import { CliError } from "./curves";
import { fitPowerLaw } from "./ols";
import { Series, renderPlot } from "./svg";

export const FIT_AGREEMENT_TOL = 1e-6;

export interface ScalingSpec {
  inputs: string[];
  out: string;
  policy?: string;
}

export interface PolicyScaling {
  policy: string;
  axis: string;
  points: Array<[number, number]>;
  exponent: number;
  intercept: number;
  r2: number;
}

export function buildScaling(rows: SummaryRow[], policy?: string): PolicyScaling[] {
  const filtered = policy ? rows.filter((r) => r.policy === policy) : rows;
  if (filtered.length === 0) {
    throw new CliError(policy ? `no rows match policy '${policy}'` : "no rows in input");
  }
  const byPolicy = new Map<string, SummaryRow[]>();
  for (const row of filtered) {
    const bucket = byPolicy.get(row.policy);
    if (bucket) bucket.push(row);
    else byPolicy.set(row.policy, [row]);
  }
  const out: PolicyScaling[] = [];
  for (const [name, bucket] of [...byPolicy.entries()].sort()) {
    const sorted = [...bucket].sort((a, b) => a.axisValue - b.axisValue);
    if (sorted.length < 2) {
      throw new CliError(
        `policy '${name}' has ${sorted.length} sweep point(s); need at least 2 to plot a scaling fit`,
      );
    }
    const points = sorted.map((r): [number, number] => [r.axisValue, r.meanTerminalRegret]);
    const fit = fitPowerLaw(points);
    for (const row of sorted) {
      if (row.fitExponent !== null && Math.abs(row.fitExponent - fit.exponent) > FIT_AGREEMENT_TOL) {
        throw new CliError(
          `policy '${name}': recomputed exponent ${fit.exponent} disagrees with the ` +
          `summary's fit_exponent ${row.fitExponent} beyond ${FIT_AGREEMENT_TOL}`,
        );
      }
    }
    out.push({
      policy: name, axis: sorted[0].axis, points,
      exponent: fit.exponent, intercept: fit.intercept, r2: fit.r2,
    });
  }
  return out;
}

export function plotScaling(spec: ScalingSpec): void {
  const rows = spec.inputs.flatMap((path) =>
    readSummary(fs.readFileSync(path, "utf-8"), path),
  );
  const scalings = buildScaling(rows, spec.policy);
  const axis = scalings[0].axis;
  const series: Series[] = scalings.map((s) => {
    const [xLo, xHi] = [s.points[0][0], s.points[s.points.length - 1][0]];
    const line = (x: number): [number, number] =>
      [x, Math.exp(s.intercept + s.exponent * Math.log(x))];
    return {
      label: `${s.policy} (slope ${s.exponent.toFixed(3)})`,
      points: s.points,
      scatter: true,
      overlayLine: [line(xLo), line(xHi)],
    };
  });
  const svg = renderPlot(series, {
    title: `Terminal regret vs ${axis}`,
    xLabel: axis,
    yLabel: "mean terminal regret",
    logX: true,
    logY: true,
    annotations: scalings.map(
      (s) => `${s.policy}: exponent ${s.exponent.toFixed(4)} (r2 ${s.r2.toFixed(3)})`,
    ),
  });
  fs.writeFileSync(spec.out, svg, "utf-8");
}
