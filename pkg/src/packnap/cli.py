"""Command-line interface.

    packnap run      --framework bma --trials 20 --horizon 1000 --seed 7 --out results/
    packnap generate --seed 3 --horizon 200 --out stream.csv
    packnap report   --in results/

`run` executes one framework's experiment and writes the per-stage, summary,
and curve CSVs.  `generate` exports a raw data stream.  `report` recomputes
the merged summary and curves from whatever stage CSVs sit in a directory and
renders the reward/feasibility figures next to them.

Exit codes: 2 for usage errors (unknown flags, bad keys), 1 for numeric or
I/O failures, 0 on success.
"""

from __future__ import annotations

import argparse
import glob
import os
import sys

from .datagen import ArmaConfig, generate_stream, write_stream_csv
from .errors import NumericError
from .harness import (SUMMARY_HEADER, build_config, parse_config_file,
                      read_stage_csv, run_experiment, running_mean_curves,
                      summarize, write_curve_csv, write_summary_csv)
from .plotting import render_curves


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="packnap",
                                     description="online contextual knapsack benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one framework's experiment")
    run_p.add_argument("--framework", choices=("bma", "bgs", "pto", "dfl"))
    run_p.add_argument("--trials", type=int)
    run_p.add_argument("--horizon", type=int)
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--config", type=str, help="flat key = value file")
    run_p.add_argument("--out", type=str, help="output directory")
    run_p.add_argument("--workers", type=int, help="parallel trial workers")
    run_p.set_defaults(func=_cmd_run)

    gen_p = sub.add_parser("generate", help="export a data stream as CSV")
    gen_p.add_argument("--seed", type=int, required=True)
    gen_p.add_argument("--horizon", type=int, required=True)
    gen_p.add_argument("--out", type=str, required=True)
    gen_p.set_defaults(func=_cmd_generate)

    rep_p = sub.add_parser("report", help="recompute summaries and figures from stage CSVs")
    rep_p.add_argument("--in", dest="in_dir", type=str, required=True)
    rep_p.add_argument("--no-figures", action="store_true",
                       help="skip PNG rendering, write CSVs only")
    rep_p.set_defaults(func=_cmd_report)
    return parser


def _cmd_run(args) -> int:
    values = parse_config_file(args.config) if args.config else {}
    overrides = {
        "framework": args.framework,
        "trials": args.trials,
        "horizon": args.horizon,
        "base_seed": args.seed,
        "out": args.out,
        "workers": args.workers,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = build_config(values)
    result = run_experiment(cfg)
    s = result.summary
    print(SUMMARY_HEADER)
    print(f"{s.framework},{s.trials},{s.horizon},{s.mean_r_full:.17g},{s.std_r_full:.17g},"
          f"{s.mean_r_half:.17g},{s.std_r_half:.17g},{s.mean_feas_full:.17g},"
          f"{s.std_feas_full:.17g},{s.mean_feas_half:.17g},{s.std_feas_half:.17g}")
    return 0


def _cmd_generate(args) -> int:
    stream = generate_stream(ArmaConfig(), args.seed, args.horizon)
    write_stream_csv(stream, args.out)
    print(f"wrote {len(stream)} stages to {args.out}")
    return 0


def _cmd_report(args) -> int:
    paths = sorted(glob.glob(os.path.join(args.in_dir, "stages_*.csv")))
    if not paths:
        raise ValueError(f"no stage CSVs found in {args.in_dir}")
    by_framework: dict[str, list] = {}
    for path in paths:
        for rec in read_stage_csv(path):
            by_framework.setdefault(rec.framework, []).append(rec)
    summaries = []
    curves_by_fw = {}
    for fw in sorted(by_framework):
        records = by_framework[fw]
        summaries.append(summarize(records))
        curves = running_mean_curves(records)
        curves_by_fw[fw] = curves
        write_curve_csv(curves, "reward", os.path.join(args.in_dir, f"curve_reward_{fw}.csv"))
        write_curve_csv(curves, "feasibility",
                        os.path.join(args.in_dir, f"curve_feasibility_{fw}.csv"))
    write_summary_csv(summaries, os.path.join(args.in_dir, "summary.csv"))
    if not args.no_figures:
        render_curves(curves_by_fw, "reward", os.path.join(args.in_dir, "reward.png"),
                      "time-averaged cumulative reward")
        render_curves(curves_by_fw, "feasibility", os.path.join(args.in_dir, "feasibility.png"),
                      "time-averaged feasibility")
    print(f"report written for frameworks: {', '.join(sorted(by_framework))}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NumericError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
