"""Command-line entry points for running and inspecting search pipelines.

Subcommands map onto the pipeline stages: ``generate``, ``score-paths``,
``score-expressibility``, ``train``, ``pipeline`` (all stages) and
``report``. Every subcommand takes ``--config <file>`` (JSON, see README)
and optionally ``--seed`` to override the configured master seed. Exit
codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import pipeline as pl
from .report import report as build_report


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dqas",
        description="Search for distributed parameterized quantum circuits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in [
        ("generate", "generate the circuit pool (stage 1)"),
        ("score-paths", "rank the pool by DAG path count (stage 2)"),
        ("score-expressibility", "rank the survivors by expressibility (stage 3)"),
        ("train", "train candidates on the task in order (stage 4)"),
        ("pipeline", "run all stages, skipping completed ones"),
        ("report", "render tables, CSVs and figures from a run directory"),
    ]:
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="pipeline config file (JSON)")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--workers", type=int, default=None, help="override worker count")
        if name == "report":
            p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    return parser


def _load_config(args: argparse.Namespace) -> pl.PipelineConfig:
    cfg = pl.PipelineConfig.from_file(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    if args.workers is not None:
        cfg = dataclasses.replace(cfg, workers=args.workers)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        if args.command == "generate":
            pl.stage_generate(cfg)
        elif args.command == "score-paths":
            pl.stage_paths(cfg)
        elif args.command == "score-expressibility":
            pl.stage_express(cfg)
        elif args.command == "train":
            pl.stage_train(cfg)
        elif args.command == "pipeline":
            rep = pl.run_pipeline(cfg)
            _print_report(rep)
        elif args.command == "report":
            summary = build_report(cfg.output_dir, figures=not args.no_figures)
            for key, value in summary.items():
                print(f"{key}\t{value}")
    except pl.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def _print_report(rep: pl.PipelineReport) -> None:
    print(f"stages done: {', '.join(rep.stages_done)}")
    if rep.ground_energy is not None:
        print(f"ground energy: {rep.ground_energy:.6f}")
    if rep.best_energy is not None:
        print(f"best energy:   {rep.best_energy:.6f}  (gap {rep.gap:.6f})")
    print(f"solutions: {rep.n_solutions}")
    if rep.min_ebits_solving is not None:
        print(f"min ebits among solving circuits: {rep.min_ebits_solving}")


if __name__ == "__main__":
    sys.exit(main())
