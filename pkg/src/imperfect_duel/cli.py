"""Command-line entry point.

Subcommands:

- ``run``: execute one experiment config, write trace.csv + report.json.
- ``sweep``: cross-product over listed rho values and algorithms, one
  result directory per cell plus a summary table of fitted orders.
- ``fit``: re-fit the regret order on an existing trace CSV.
- ``make-corpus``: write a synthetic Gaussian-mixture corpus CSV.
- ``ingest-check``: validate a corpus CSV and print a cluster summary.

Exit codes: 0 success, 1 config error, 2 run failure.  Worker count is
taken from the IMPERFECT_DUEL_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .corpus import ingest_corpus, make_synthetic_corpus
from .experiments import (
    export_results,
    fit_order,
    parse_config,
    run_experiment,
)

__all__ = ["main"]


def _apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply dotted key=value overrides, last one wins."""
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override must look like section.key=value, got {item!r}")
        path, raw_value = item.split("=", 1)
        try:
            value = json.loads(raw_value)
        except json.JSONDecodeError:
            value = raw_value
        keys = path.split(".")
        node = data
        for k in keys[:-1]:
            if k not in node or not isinstance(node[k], dict):
                node[k] = {}
            node = node[k]
        node[keys[-1]] = value
    return data


def _cmd_run(args: argparse.Namespace) -> int:
    with open(args.config) as fh:
        data = json.load(fh)
    _apply_overrides(data, args.override)
    cfg = parse_config(data)
    traces = run_experiment(cfg)
    report = export_results(cfg, traces, args.out)
    print(f"aggregate slope: {report['aggregate_slope']:.4f} "
          f"(stderr {report['aggregate_stderr']:.4f}, failures {report['failures']})")
    return 2 if report["failures"] == len(traces) else 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    with open(args.config) as fh:
        data = json.load(fh)
    for key in data:
        if key not in {"base", "sweep"}:
            raise ValueError(f"unknown config key: {key}")
    base = data["base"]
    sweep = data["sweep"]
    for key in sweep:
        if key not in {"rho", "algorithms"}:
            raise ValueError(f"unknown config key: sweep.{key}")
    rhos = sweep.get("rho", [None])
    algorithms = sweep.get("algorithms", [base.get("algorithm")])
    out_root = Path(args.out)
    out_root.mkdir(parents=True, exist_ok=True)
    summary = []
    failures = 0
    for alg in algorithms:
        for rho in rhos:
            cell = json.loads(json.dumps(base))
            cell["algorithm"] = dict(alg)
            if rho is not None:
                cell["corruption"] = dict(cell.get("corruption", {}))
                cell["corruption"]["rho"] = rho
                if "C" in cell["corruption"]:
                    del cell["corruption"]["C"]
            cfg = parse_config(cell)
            name = alg["type"]
            if "alpha" in alg:
                name += f"_a{alg['alpha']}"
            cell_name = f"{name}_rho{rho}" if rho is not None else name
            traces = run_experiment(cfg)
            report = export_results(cfg, traces, out_root / cell_name)
            failures += report["failures"]
            summary.append(
                {
                    "cell": cell_name,
                    "algorithm": alg["type"],
                    "alpha": alg.get("alpha"),
                    "rho": rho,
                    "slope": report["aggregate_slope"],
                    "stderr": report["aggregate_stderr"],
                    "failures": report["failures"],
                }
            )
            print(f"{cell_name}: slope {report['aggregate_slope']:.4f}")
    with open(out_root / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    with open(out_root / "summary.csv", "w", newline="\n") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["cell", "algorithm", "alpha", "rho", "slope", "stderr", "failures"]
        )
        writer.writeheader()
        writer.writerows(summary)
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    rounds = []
    values = []
    with open(args.csv) as fh:
        reader = csv.DictReader(fh)
        if args.column not in (reader.fieldnames or []):
            raise ValueError(f"column {args.column!r} not found in {args.csv}")
        for row in reader:
            rounds.append(float(row["t"]))
            values.append(float(row[args.column]))
    fit = fit_order(np.asarray(rounds), np.asarray(values), args.fraction)
    print(f"{fit.slope:.6f}")
    return 0


def _cmd_make_corpus(args: argparse.Namespace) -> int:
    labels = make_synthetic_corpus(args.out, args.n, args.d, args.k, args.seed)
    if args.labels:
        np.savetxt(args.labels, labels, fmt="%d")
    print(f"wrote {args.n}x{args.d} corpus with {args.k} components to {args.out}")
    return 0


def _cmd_ingest_check(args: argparse.Namespace) -> int:
    corpus = ingest_corpus(args.csv, args.k, args.seed)
    counts = np.bincount(corpus.assignments, minlength=args.k)
    print(f"rows: {corpus.items.shape[0]}, dim: {corpus.items.shape[1]}, k: {args.k}")
    for j in range(args.k):
        norm = float(np.linalg.norm(corpus.centroids[j]))
        print(f"cluster {j}: size {int(counts[j])}, centroid norm {norm:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imperfect-duel")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default="results")
    p_run.add_argument("-O", "--override", action="append", default=[],
                       metavar="KEY=VALUE", help="dotted config override")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a rho x algorithm grid")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_fit = sub.add_parser("fit", help="re-fit the order on an existing trace CSV")
    p_fit.add_argument("--csv", required=True)
    p_fit.add_argument("--fraction", type=float, default=0.01)
    p_fit.add_argument("--column", default="cum_dueling_mean")
    p_fit.set_defaults(func=_cmd_fit)

    p_mk = sub.add_parser("make-corpus", help="write a synthetic corpus CSV")
    p_mk.add_argument("--out", required=True)
    p_mk.add_argument("--n", type=int, default=2000)
    p_mk.add_argument("--d", type=int, default=15)
    p_mk.add_argument("--k", type=int, default=5)
    p_mk.add_argument("--seed", type=int, default=0)
    p_mk.add_argument("--labels", default=None, help="optional path for true labels")
    p_mk.set_defaults(func=_cmd_make_corpus)

    p_ic = sub.add_parser("ingest-check", help="validate a corpus CSV")
    p_ic.add_argument("--csv", required=True)
    p_ic.add_argument("--k", type=int, required=True)
    p_ic.add_argument("--seed", type=int, default=0)
    p_ic.set_defaults(func=_cmd_ingest_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
