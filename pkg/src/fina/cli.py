"""Command-line entry point: ``fina simulate|compare|gen-schedule|metrics``.

Exit codes: 0 success, 2 configuration error, 3 numerical divergence,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from . import activity as act
from .config import STRATEGIES, ConfigError, ExperimentConfig, load_config
from .harness import (ComparisonReport, build_schedules, compare_strategies, emit_outputs,
                      read_trace_csv, run_experiment, summarize)
from .thermal import DivergenceError

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("fina")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="master seed (u64)")
    p.add_argument("--samples", type=int, help="number of control periods")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("csv", "json", "both"), help="what to write")
    p.add_argument("--candidate-mode", help="'union' or 'grid:<step>'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fina", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one strategy")
    _common(p)
    p.add_argument("--strategy", choices=STRATEGIES)

    p = sub.add_parser("compare", help="run several strategies on identical schedules")
    _common(p)
    p.add_argument("--strategy", action="append", choices=STRATEGIES, dest="strategies",
                   help="repeat to select strategies (default: config list)")

    p = sub.add_parser("gen-schedule", help="write the weekly schedule templates as CSV")
    _common(p)

    p = sub.add_parser("metrics", help="recompute the summary of an existing trace CSV")
    p.add_argument("trace", help="trace CSV written by simulate/compare")
    p.add_argument("--window", type=int, default=100, help="warmup window (default 100)")
    p.add_argument("--out", help="write the summary JSON here instead of stdout")
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    return cfg.with_overrides(
        master_seed=args.seed, samples=args.samples, out_dir=args.out, out_format=args.format,
        candidate_mode=args.candidate_mode, strategy=getattr(args, "strategy", None))


def _simulate(args) -> int:
    cfg = _config(args)
    trace = run_experiment(cfg)
    report = ComparisonReport(cfg, [trace], [summarize(trace)])
    for path in emit_outputs(report, cfg.out_dir, cfg.out_format):
        print(path)
    return EXIT_OK


def _compare(args) -> int:
    cfg = _config(args)
    strategies = args.strategies if args.strategies is not None else list(cfg.strategies)
    if not strategies:
        raise ConfigError("no strategies selected")
    report = compare_strategies(cfg, strategies)
    for path in emit_outputs(report, cfg.out_dir, cfg.out_format, summary_name="comparison.json"):
        print(path)
    for s in report.summaries:
        print(f"{s.strategy:12s} overlap={s.tdiff_overlap:6.2f}% sr_jsd={s.sr_jsd:.4f} "
              f"fi_u={s.avg_fi_u:.4f} cov_u={s.avg_cov_u:.4f} fi_sr={s.avg_fi_sr:.4f} cov_sr={s.avg_cov_sr:.4f}")
    return EXIT_OK


def _gen_schedule(args) -> int:
    cfg = _config(args)
    schedules = build_schedules(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "schedules.csv")
    act.write_schedule_csv(path, [s.template for s in schedules])
    realized = os.path.join(cfg.out_dir, "realized_schedule.csv")
    with open(realized, "w") as fh:
        fh.write("human_id,day,hour,activity\n")
        for hid, s in enumerate(schedules):
            for i, code in enumerate(s.realized):
                fh.write(f"{hid},{i // 24},{i % 24},{act.ACTIVITIES[code].value}\n")
    print(path)
    print(realized)
    return EXIT_OK


def _metrics(args) -> int:
    name = os.path.splitext(os.path.basename(args.trace))[0].removeprefix("trace_")
    summary = summarize(read_trace_csv(args.trace, strategy=name, window=args.window))
    text = json.dumps(summary.to_dict(), indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"simulate": _simulate, "compare": _compare, "gen-schedule": _gen_schedule, "metrics": _metrics}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except DivergenceError as exc:
        log.error("numerical divergence: %s", exc)
        return EXIT_DIVERGENCE
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except ValueError as exc:
        # malformed trace / schedule files
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
