#!/usr/bin/env node
/**
 * plots <command> --input <csv...> --out <path> [--policy name]
 *
 * Commands:
 *   curves   regret-vs-round curves from results CSVs (--log-x/--log-y opt-in)
 *   scaling  terminal-regret power-law plot from a sweep summary CSV
 */

import { SchemaError } from "./csv";
import { CliError, plotRegretCurves } from "./curves";
import { plotScaling } from "./scaling";

interface Args {
  command: string;
  inputs: string[];
  out?: string;
  policy?: string;
  logX: boolean;
  logY: boolean;
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) throw new CliError("usage: plots <curves|scaling> --input <csv...> --out <path>");
  const args: Args = { command: argv[0], inputs: [], logX: false, logY: false };
  let i = 1;
  while (i < argv.length) {
    const flag = argv[i];
    if (flag === "--input") {
      i += 1;
      while (i < argv.length && !argv[i].startsWith("--")) {
        args.inputs.push(argv[i]);
        i += 1;
      }
      if (args.inputs.length === 0) throw new CliError("--input needs at least one path");
    } else if (flag === "--out") {
      args.out = argv[i + 1];
      i += 2;
    } else if (flag === "--policy") {
      args.policy = argv[i + 1];
      i += 2;
    } else if (flag === "--log-x") {
      args.logX = true;
      i += 1;
    } else if (flag === "--log-y") {
      args.logY = true;
      i += 1;
    } else {
      throw new CliError(`unknown flag '${flag}'`);
    }
  }
  if (args.inputs.length === 0) throw new CliError("missing required flag --input");
  if (!args.out) throw new CliError("missing required flag --out");
  return args;
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    if (args.command === "curves") {
      plotRegretCurves({ inputs: args.inputs, out: args.out!, policy: args.policy,
                         logX: args.logX, logY: args.logY });
    } else if (args.command === "scaling") {
      plotScaling({ inputs: args.inputs, out: args.out!, policy: args.policy });
    } else {
      throw new CliError(`unknown command '${args.command}' (expected curves or scaling)`);
    }
    return 0;
  } catch (err) {
    if (err instanceof CliError || err instanceof SchemaError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    if (err instanceof Error && (err as NodeJS.ErrnoException).code === "ENOENT") {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
