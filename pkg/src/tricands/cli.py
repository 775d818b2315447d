"""Command-line entry point.

Subcommands:

* ``run CONFIG``       -- run an experiment from a config file (resumable)
* ``measure``          -- candidate-count / timing sweep over (d, n)
* ``summarize RUNDIR`` -- rebuild summary CSVs from persisted runs
* ``list-benchmarks``  -- print registered objective names
* ``candidates CSV``   -- dump the candidate set for a design CSV

Exit codes: 0 on success, 2 on configuration errors, 3 on runtime failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .benchfn import list_benchmarks
from .candidates import SubsampleConfig, tricands
from .errors import ConfigError, TricandsError
from .harness import (
    measure_candidates,
    parse_config,
    read_run_csv,
    run_experiment,
    summarize,
    write_measure_csv,
    write_summary_csvs,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tricands",
        description="Bayesian optimization with triangulation-based candidates",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment from a config file")
    run_p.add_argument("config", type=Path)
    run_p.add_argument("--reps", type=int, help="override repetitions")
    run_p.add_argument("--seed", type=int, help="override base_seed")
    run_p.add_argument("--out", type=Path, help="override out_dir")
    run_p.add_argument("--workers", type=int, default=1)

    meas_p = sub.add_parser("measure", help="candidate count / timing sweep")
    meas_p.add_argument("--dims", default="2,3,4,5,6", help="comma-separated d values")
    meas_p.add_argument(
        "--sizes", default="10,25,50,100,200", help="comma-separated n values"
    )
    meas_p.add_argument("--reps", type=int, default=3)
    meas_p.add_argument("--seed", type=int, default=0)
    meas_p.add_argument("--out", type=Path, default=Path("measure.csv"))

    sum_p = sub.add_parser("summarize", help="rebuild summaries from run CSVs")
    sum_p.add_argument("run_dir", type=Path, help="experiment output directory")
    sum_p.add_argument("--out", type=Path, help="summary directory (default run_dir)")

    sub.add_parser("list-benchmarks", help="print registered benchmark names")

    cand_p = sub.add_parser("candidates", help="dump candidates for a design CSV")
    cand_p.add_argument("design", type=Path, help="CSV of design rows (d columns)")
    cand_p.add_argument("--best", type=int, help="index of the incumbent best row")
    cand_p.add_argument(
        "--with-y",
        action="store_true",
        help="treat the last column as responses and use their argmin as best",
    )
    cand_p.add_argument("--n-sub", type=int, help="subsample cap (default 100*d)")
    cand_p.add_argument("--seed", type=int, default=0)
    cand_p.add_argument("--out", type=Path, default=Path("candidates.csv"))
    return parser


def _cmd_run(args) -> int:
    cfg = parse_config(args.config)
    if args.reps is not None:
        cfg = replace(cfg, repetitions=args.reps)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out_dir=str(args.out))
    summary = run_experiment(cfg, workers=args.workers)
    print(f"wrote {len(summary.strategies)} strategy summaries to {cfg.out_dir}")
    for name in summary.strategies:
        final = summary.median[name][-1]
        print(
            f"  {name}: median BOV at n={summary.n_values[-1]} = {final:.6g}, "
            f"mean criterion evals = {summary.mean_evals[name]:.0f}"
        )
    return 0


def _cmd_measure(args) -> int:
    d_list = [int(s) for s in args.dims.split(",") if s.strip()]
    n_list = [int(s) for s in args.sizes.split(",") if s.strip()]
    rows = measure_candidates(d_list, n_list, reps=args.reps, seed=args.seed)
    write_measure_csv(rows, args.out)
    print(f"wrote {len(rows)} cells to {args.out}")
    return 0


def _cmd_summarize(args) -> int:
    run_dir = args.run_dir / "runs" if (args.run_dir / "runs").is_dir() else args.run_dir
    paths = sorted(run_dir.glob("*.csv"))
    if not paths:
        raise ConfigError(f"no run CSVs under {run_dir}")
    records = [read_run_csv(p) for p in paths]
    summary = summarize(records)
    write_summary_csvs(summary, args.out or args.run_dir)
    print(f"summarized {len(records)} runs across {len(summary.strategies)} strategies")
    return 0


def _cmd_list_benchmarks() -> int:
    for name in list_benchmarks():
        print(name)
    return 0


def _cmd_candidates(args) -> int:
    data = np.loadtxt(args.design, delimiter=",", ndmin=2)
    best = args.best
    if args.with_y:
        best = int(np.argmin(data[:, -1]))
        data = data[:, :-1]
    cfg = SubsampleConfig(n_sub_max=args.n_sub, seed=args.seed)
    cands = tricands(data, cfg, best_index=best)
    cands.write_csv(args.out)
    print(f"wrote {cands.N} candidates to {args.out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "measure":
            return _cmd_measure(args)
        if args.command == "summarize":
            return _cmd_summarize(args)
        if args.command == "list-benchmarks":
            return _cmd_list_benchmarks()
        if args.command == "candidates":
            return _cmd_candidates(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (TricandsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
