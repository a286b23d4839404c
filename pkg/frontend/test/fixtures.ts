import { mkdirSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface CellSpec {
  name: string;
  slope: number;
  /** value(t) for the mean series. */
  value: (t: number) => number;
  /** std(t); defaults to zero. */
  std?: (t: number) => number;
}

export function traceCsv(spec: CellSpec, rounds: number[]): string {
  const lines = ["t,cum_dueling_mean,cum_dueling_std,cum_functional_mean"];
  for (const t of rounds) {
    const m = spec.value(t);
    const s = spec.std ? spec.std(t) : 0;
    lines.push(`${t},${m},${s},${m * 2}`);
  }
  return lines.join("\n") + "\n";
}

export function writeCell(dir: string, spec: CellSpec, rounds: number[]): void {
  mkdirSync(dir, { recursive: true });
  writeFileSync(join(dir, "trace.csv"), traceCsv(spec, rounds));
  writeFileSync(
    join(dir, "report.json"),
    JSON.stringify({
      aggregate_slope: spec.slope,
      aggregate_stderr: 0.001,
      failures: 0,
      per_seed: [],
    }),
  );
}

export const ROUNDS = Array.from({ length: 100 }, (_, i) => (i + 1) * 100);

export function makeTmpDir(prefix: string): string {
  return mkdtempSync(join(tmpdir(), prefix));
}

/** A sweep layout: 2 algorithms x 3 rho values. */
export function makeSweepDir(): string {
  const root = makeTmpDir("plotkit-sweep-");
  const algos: Array<[string, number]> = [
    ["dbgd_a0.25", 0.75],
    ["rosmid_a0.5", 0.6],
  ];
  for (const [alg, expo] of algos) {
    for (const rho of [0.5, 0.6, 0.75]) {
      writeCell(
        join(root, `${alg}_rho${rho}`),
        {
          name: `${alg}_rho${rho}`,
          slope: expo + rho / 100,
          value: (t) => Math.pow(t, expo) * (1 + rho),
          std: (t) => 0.1 * Math.pow(t, expo),
        },
        ROUNDS,
      );
    }
  }
  return root;
}
