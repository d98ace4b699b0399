"""Command-line front end for the experiment harness."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import as_error_trace, check_consistency_conditions
from .harness import (SUITE_NAMES, load_experiment_config, run_experiment,
                      run_suite)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker processes for trial-level parallelism")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ditherfield",
        description="Field reconstruction from 1-bit dithered sensors: "
                    "run verification experiments and suites.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", help="path to an experiment JSON document")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    _add_common(p_run)

    p_suite = sub.add_parser("suite", help="run a named verification suite")
    p_suite.add_argument("name", choices=SUITE_NAMES)
    _add_common(p_suite)

    p_check = sub.add_parser("check-conditions",
                             help="evaluate the distortion-consistency conditions "
                                  "for a config's schedule/basis/deployment")
    p_check.add_argument("config")

    p_trace = sub.add_parser("trace-as",
                             help="record one nested-sample-path error trace")
    p_trace.add_argument("config")
    p_trace.add_argument("--seed", type=int, default=None)
    _add_common(p_trace)

    args = parser.parse_args(argv)

    if args.command == "run":
        config = load_experiment_config(args.config, seed_override=args.seed)
        outcome = run_experiment(config, args.out, workers=args.workers)
        print(f"{config.experiment_id}: {outcome.status}")
        print(outcome.detail)
        for path in outcome.artifacts:
            print(f"wrote {path}")
        return 0 if outcome.status == "PASS" else 1

    if args.command == "suite":
        result = run_suite(args.name, args.out, workers=args.workers)
        for row in result.rows:
            print(f"{'PASS' if row.passed else 'FAIL'}  {row.name}  [{row.detail}]")
        print(f"suite {result.suite}: {'PASS' if result.all_pass else 'FAIL'}")
        return 0 if result.all_pass else 1

    if args.command == "check-conditions":
        config = load_experiment_config(args.config)
        report = check_consistency_conditions(config.schedule, config.basis,
                                              config.deployment, config.n_grid)
        print(f"truncation grows: {'ok' if report.truncation_ok else 'FAIL'} "
              f"(m: {report.m_values[0]} -> {report.m_values[-1]})")
        print(f"deployment floor positive: "
              f"{'ok' if report.infimum_positive else 'FAIL'} "
              f"(infimum {report.infimum})")
        print(f"variance share vanishes: "
              f"{'ok' if report.variance_ok else 'FAIL'} "
              f"(values {[f'{v:.3e}' for v in report.variance_condition_values]})")
        print(f"overall: {'PASS' if report.all_pass else 'FAIL'}")
        return 0 if report.all_pass else 1

    if args.command == "trace-as":
        config = load_experiment_config(args.config, seed_override=args.seed)
        if config.schedule.schedule_kind != "power":
            print("trace-as needs a power schedule (its exponent is the "
                  "truncation growth rate)", file=sys.stderr)
            return 2
        trace = as_error_trace(config.field, config.deployment, config.noise,
                               psi=config.schedule.param, seed=config.seed,
                               n_checkpoints=config.n_grid)
        for n, m, s in zip(trace.checkpoints, trace.m_values, trace.sup_error):
            print(f"n={n} m={m} sup|S_n|={s:.6e}")
        ratio = trace.sup_error[-1] / trace.sup_error[0]
        print(f"first-to-last ratio {ratio:.4f} "
              "(single-path regression, not a proof of convergence)")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{config.experiment_id}_trace.json"
        path.write_text(json.dumps(trace.to_json(), sort_keys=True, indent=2) + "\n")
        print(f"wrote {path}")
        return 0

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
