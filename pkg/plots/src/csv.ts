/**
 * Readers for the harness CSV schemas. The column set and order are fixed by
 * the experiment tool; anything else is rejected with the offending columns
 * named so a schema drift fails loudly instead of plotting garbage.
 */

export const RESULT_COLUMNS = [
  "run_id", "policy", "metric", "instance_kind", "L", "K", "n", "chi",
  "trial", "checkpoint_round", "cum_regret", "seed",
] as const;

export const SUMMARY_COLUMNS = [
  "run_id", "policy", "metric", "instance_kind", "L", "K", "n", "chi",
  "seed", "axis", "axis_value", "mean_terminal_regret", "stderr",
  "fit_exponent", "fit_r2",
] as const;

export class SchemaError extends Error {}

export interface ResultRow {
  policy: string;
  trial: number;
  checkpointRound: number;
  cumRegret: number;
}

export interface SummaryRow {
  policy: string;
  axis: string;
  axisValue: number;
  meanTerminalRegret: number;
  stderr: number;
  /** empty string in the CSV means the harness marked the fit absent */
  fitExponent: number | null;
  fitR2: number | null;
}

/** The harness never quotes fields, so line/comma splitting is exact. */
export function parseCsv(text: string): string[][] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

function checkHeader(header: string[], expected: readonly string[], path: string): void {
  const missing = expected.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(`${path}: missing columns: ${missing.join(", ")}`);
  }
  if (header.length !== expected.length || expected.some((c, i) => header[i] !== c)) {
    throw new SchemaError(
      `${path}: columns must be exactly [${expected.join(", ")}], got [${header.join(", ")}]`,
    );
  }
}

function num(value: string, column: string, path: string): number {
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) {
    throw new SchemaError(`${path}: column '${column}' has non-numeric value '${value}'`);
  }
  return parsed;
}

export function readResults(text: string, path: string): ResultRow[] {
  const rows = parseCsv(text);
  if (rows.length === 0) throw new SchemaError(`${path}: empty file`);
  checkHeader(rows[0], RESULT_COLUMNS, path);
  return rows.slice(1).map((row) => ({
    policy: row[1],
    trial: num(row[8], "trial", path),
    checkpointRound: num(row[9], "checkpoint_round", path),
    cumRegret: num(row[10], "cum_regret", path),
  }));
}

export function readSummary(text: string, path: string): SummaryRow[] {
  const rows = parseCsv(text);
  if (rows.length === 0) throw new SchemaError(`${path}: empty file`);
  checkHeader(rows[0], SUMMARY_COLUMNS, path);
  return rows.slice(1).map((row) => ({
    policy: row[1],
    axis: row[9],
    axisValue: num(row[10], "axis_value", path),
    meanTerminalRegret: num(row[11], "mean_terminal_regret", path),
    stderr: num(row[12], "stderr", path),
    fitExponent: row[13] === "" ? null : num(row[13], "fit_exponent", path),
    fitR2: row[14] === "" ? null : num(row[14], "fit_r2", path),
  }));
}
