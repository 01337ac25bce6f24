"""Command-line entry point.

Subcommands:
  run              execute an experiment sweep and export CSVs, manifest
                   and report figures
  summarize        recompute the summary CSV and figures from an existing
                   rounds.csv
  validate-config  check a config file and print the resolved settings
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import yaml

from .automaton import ConfigurationError
from .config import (
    ExperimentConfig,
    apply_overrides,
    config_to_dict,
    load_config,
)
from .data import IdxFormatError
from .plots import render_figures
from .reporting import (
    export_results,
    load_rounds_csv,
    records_to_rows,
    summarize_rows,
    write_summary_csv,
)
from .simulation import run_experiment


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}")


def _parse_strategies(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedcell", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-run progress")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute an experiment sweep")
    run_p.add_argument("--config", type=Path, help="YAML config file (defaults apply if omitted)")
    run_p.add_argument("--seed", type=_parse_seeds, help="comma-separated seed list override")
    run_p.add_argument("--strategy", type=_parse_strategies, help="comma-separated strategies override")
    run_p.add_argument("--timing", choices=("wallclock", "simulated"), help="timing mode override")
    run_p.add_argument("--out", type=Path, help="output directory override")
    run_p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    sum_p = sub.add_parser("summarize", help="recompute summary.csv and figures from rounds.csv")
    sum_p.add_argument("--rounds", type=Path, required=True, help="path to an existing rounds.csv")
    sum_p.add_argument("--out", type=Path, help="output directory (default: alongside rounds.csv)")
    sum_p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    val_p = sub.add_parser("validate-config", help="validate a config file")
    val_p.add_argument("--config", type=Path, required=True, help="YAML config file")

    return parser


def _load_with_overrides(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    return apply_overrides(
        config,
        seeds=args.seed,
        strategies=args.strategy,
        timing_mode=args.timing,
        output_dir=str(args.out) if args.out else None,
    )


def _print_summary(summary) -> None:
    header = f"{'strategy':<10} {'final acc':<20} {'final macro-F1':<20} {'total time (s)':<22} {'stragglers':<16}"
    print(header)
    print("-" * len(header))
    for row in summary:
        print(
            f"{row.strategy:<10} "
            f"{row.final_accuracy_mean:.4f} +/- {row.final_accuracy_std:.4f}   "
            f"{row.final_macro_f1_mean:.4f} +/- {row.final_macro_f1_std:.4f}   "
            f"{row.total_seconds_mean:10.2f} +/- {row.total_seconds_std:.2f}   "
            f"{row.stragglers_selected_mean:6.1f} +/- {row.stragglers_selected_std:.1f}"
        )


def cmd_run(args) -> int:
    config = _load_with_overrides(args)
    bundle = run_experiment(config)
    paths = export_results(bundle.records, bundle.summary, config, config.output_dir)
    if not args.no_figures:
        for p in render_figures(records_to_rows(bundle.records), config.output_dir):
            paths[p.stem] = p
    _print_summary(bundle.summary)
    print()
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def cmd_summarize(args) -> int:
    rows = load_rounds_csv(args.rounds)
    out = args.out if args.out else args.rounds.parent
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize_rows(rows)
    write_summary_csv(summary, out / "summary.csv")
    if not args.no_figures:
        render_figures(rows, out)
    _print_summary(summary)
    print(f"\nsummary: {out / 'summary.csv'}")
    return 0


def cmd_validate_config(args) -> int:
    config = load_config(args.config)
    print(yaml.safe_dump(config_to_dict(config), sort_keys=False), end="")
    print(f"# {args.config}: OK")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handlers = {
        "run": cmd_run,
        "summarize": cmd_summarize,
        "validate-config": cmd_validate_config,
    }
    try:
        return handlers[args.command](args)
    except (ConfigurationError, IdxFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
