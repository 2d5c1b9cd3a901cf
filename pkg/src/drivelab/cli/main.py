"""Command-line front door.

Subcommands: gen-scenarios, pretrain, collect, finetune, eval, pipeline,
matrix, baselines, plot. Exit codes: 0 success, 1 configuration error,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from drivelab.cli.config import (
    ExperimentConfig,
    load_config,
    save_config,
    serialize_config,
    set_by_path,
)
from drivelab.cli.experiments import Run, run_baselines, run_matrix, run_pipeline
from drivelab.errors import ConfigError, DrivelabError


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, default=None, help="JSON config file")
    p.add_argument("--seed", type=int, default=None, help="override experiment seed")
    p.add_argument("--out", type=str, default=None, help="override output directory")
    p.add_argument("--name", type=str, default=None, help="override experiment name")
    p.add_argument("--resume", action="store_true", help="reuse completed stages")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers where supported")
    p.add_argument(
        "--set", action="append", default=[], metavar="PATH=VALUE",
        help="override a config entry, e.g. --set collect.k=32",
    )


def _build_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    for item in args.set:
        path, _, raw = item.partition("=")
        if not _:
            raise ConfigError(f"--set needs PATH=VALUE, got {item!r}")
        cfg = set_by_path(cfg, path, json.loads(raw))
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    if args.name is not None:
        cfg.name = args.name
    return cfg


def _parse_axes(items: list[str]) -> dict[str, list]:
    axes: dict[str, list] = {}
    for item in items:
        path, _, raw = item.partition("=")
        if not _:
            raise ConfigError(f"--axis needs PATH=v1,v2,..., got {item!r}")
        axes[path] = [json.loads(v) for v in raw.split(",")]
    return axes


def _print_report(name: str, report) -> None:
    print(
        f"{name}: driving_score={report.driving_score:.4f} "
        f"collision_rate={report.collision_rate:.4f} "
        f"offroad_rate={report.offroad_rate:.4f} "
        f"distance={report.distance_mean:.1f}m min_ade={report.min_ade:.3f}m"
    )


def cmd_gen_scenarios(args) -> int:
    cfg = _build_config(args)
    run = Run(cfg, resume=args.resume)
    splits = run.stage_scenarios()
    for split, scenarios in splits.items():
        print(f"{split}: {len(scenarios)} scenarios -> {run.dir / 'scenarios' / split}")
    return 0


def cmd_pretrain(args) -> int:
    cfg = _build_config(args)
    run = Run(cfg, resume=args.resume)
    splits = run.stage_scenarios()
    run.stage_pretrain(splits["train"])
    print(f"base checkpoint -> {run.dir / 'checkpoints' / 'base.npz'}")
    return 0


def cmd_collect(args) -> int:
    cfg = _build_config(args)
    run = Run(cfg, resume=args.resume)
    splits = run.stage_scenarios()
    base = run.stage_pretrain(splits["train"])
    ds = run.stage_collect(base, splits["train"])
    print(f"collected {len(ds.records)} rollouts ({ds.n_rows} rows) -> {run.dir / 'datasets' / 'gen'}")
    return 0


def cmd_finetune(args) -> int:
    cfg = _build_config(args)
    run = Run(cfg, resume=args.resume)
    splits = run.stage_scenarios()
    base = run.stage_pretrain(splits["train"])
    dataset = run.stage_collect(base, splits["train"])
    run.stage_finetune(base, splits["train"], "final", initial_dataset=dataset)
    print(f"fine-tuned checkpoint -> {run.dir / 'checkpoints' / 'final.npz'}")
    return 0


def cmd_eval(args) -> int:
    cfg = _build_config(args)
    run = Run(cfg, resume=True)
    splits = run.stage_scenarios()
    ckpt = Path(args.checkpoint) if args.checkpoint else run.dir / "checkpoints" / "final.npz"
    from drivelab.policy import load_checkpoint

    params, _, _ = load_checkpoint(ckpt)
    report, _ = run.stage_eval(params, splits["test"], args.tag)
    _print_report(args.tag, report)
    return 0


def cmd_pipeline(args) -> int:
    cfg = _build_config(args)
    run, report, _ = run_pipeline(cfg, resume=args.resume)
    _print_report("final", report)
    print(f"run dir: {run.dir}")
    return 0


def cmd_baselines(args) -> int:
    cfg = _build_config(args)
    run, reports, _ = run_baselines(cfg, resume=args.resume)
    for name, report in reports.items():
        _print_report(name, report)
    print(f"table: {run.dir / 'reports' / 'baselines.csv'}")
    return 0


def cmd_matrix(args) -> int:
    cfg = _build_config(args)
    axes = _parse_axes(args.axis)
    run, rows = run_matrix(cfg, axes, resume=args.resume, jobs=args.jobs)
    for row in rows:
        print(row)
    table = run.dir / "reports" / "matrix.csv"
    if args.plot and axes:
        from drivelab.cli.plots import plot_table_column

        first_axis = sorted(axes)[0]
        out = run.dir / "plots" / "matrix_driving_score.png"
        plot_table_column(table, first_axis, "driving_score", out)
        print(f"plot: {out}")
    print(f"table: {table}")
    return 0


def cmd_plot(args) -> int:
    from drivelab.cli.plots import plot_table_column

    out = plot_table_column(args.table, args.x, args.y, args.out_file)
    print(f"plot: {out}")
    return 0


def cmd_show_config(args) -> int:
    cfg = _build_config(args)
    if args.out_file:
        save_config(cfg, args.out_file)
    else:
        print(serialize_config(cfg))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drivelab",
        description="Closed-loop supervised fine-tuning lab for a 2D driving world.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    specs = [
        ("gen-scenarios", cmd_gen_scenarios, "generate scenario splits"),
        ("pretrain", cmd_pretrain, "behavior-clone the base policy"),
        ("collect", cmd_collect, "collect expert-guided rollouts"),
        ("finetune", cmd_finetune, "fine-tune on collected rollouts"),
        ("pipeline", cmd_pipeline, "pretrain -> collect -> finetune -> eval"),
        ("baselines", cmd_baselines, "base / continued-bc / expert-replay / rollout-sft"),
        ("matrix", cmd_matrix, "cartesian config sweeps"),
    ]
    for name, fn, help_text in specs:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.set_defaults(fn=fn)
        if name == "matrix":
            p.add_argument("--axis", action="append", default=[], metavar="PATH=v1,v2",
                           help="sweep axis, repeatable")
            p.add_argument("--plot", action="store_true", help="emit a driving-score plot")

    p = sub.add_parser("eval", help="evaluate a checkpoint on the test split")
    _add_common(p)
    p.add_argument("--checkpoint", type=str, default=None)
    p.add_argument("--tag", type=str, default="adhoc")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("plot", help="plot a column of an emitted CSV table")
    p.add_argument("table")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("out_file")
    p.set_defaults(fn=cmd_plot)

    p = sub.add_parser("show-config", help="print or save the effective config")
    _add_common(p)
    p.add_argument("--out-file", type=str, default=None)
    p.set_defaults(fn=cmd_show_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except DrivelabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # runtime failure
        print(f"runtime failure: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
