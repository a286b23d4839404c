#!/usr/bin/env node
/**
 * render_figures <result_dir> --out <dir>
 *
 * Reads trace.csv / report.json artifacts (single run or sweep layout)
 * and writes one log-log SVG panel per algorithm. Inputs are read-only.
 */

import { parseArgs } from "node:util";

import { renderFigures } from "./render.js";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        out: { type: "string", short: "o", default: "figures" },
      },
    });
  } catch (err) {
    console.error(`argument error: ${(err as Error).message}`);
    return 1;
  }
  if (parsed.positionals.length !== 1) {
    console.error("usage: render_figures <result_dir> --out <dir>");
    return 1;
  }
  try {
    const written = renderFigures(parsed.positionals[0], parsed.values.out as string);
    for (const fig of written) {
      console.log(`${fig.path}: ${fig.curves} curve(s)`);
    }
    return 0;
  } catch (err) {
    console.error(`render failed: ${(err as Error).message}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
