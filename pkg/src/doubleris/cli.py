"""Command line entry point: ``doubleris run --preset fig2 --csv``."""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from .config import PRESETS, ConfigError, parse_config
from .geometry import ConfigurationError
from .report_io import RunManifest, emit_csv, emit_plot_data, write_manifest
from .simulate import run_sweep

EXIT_CONFIG = 2
EXIT_IO = 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="doubleris", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a Monte Carlo sweep")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="flat key = value config file")
    src.add_argument("--preset", choices=sorted(PRESETS))
    run.add_argument("--trials", type=int, help="drops per axis point")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--out", default=".", help="output directory (default: .)")
    run.add_argument("--csv", action="store_true", help="write report.csv")
    run.add_argument("--plot-data", action="store_true", help="write plot_data.txt")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--quiet", action="store_true")
    return p


def _summary(report) -> str:
    rows = []
    for label, pts in report.curves().items():
        vals = " ".join(f"{p.mean_rate:7.3f}" for p in pts)
        rows.append(f"{label:24s} {vals}")
    axis = " ".join(f"{p:7g}" for p in report.config.axis_values)
    return f"{report.config.axis:24s} {axis}\n" + "\n".join(rows)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = str(args.trials)
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    try:
        cfg = parse_config(args.config, args.preset, overrides)
        cfg.validate_layout()
    except (ConfigError, ConfigurationError) as exc:
        print(f"doubleris: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report = run_sweep(cfg, n_jobs=args.jobs)
    want_csv = args.csv or not args.plot_data
    outputs = {}
    try:
        os.makedirs(args.out, exist_ok=True)
        if want_csv:
            outputs["csv"] = emit_csv(report, os.path.join(args.out, "report.csv"))
        if args.plot_data:
            outputs["plot_data"] = emit_plot_data(report, os.path.join(args.out, "plot_data.txt"))
        manifest = RunManifest.for_run(cfg, outputs, args.config, args.preset, report.wall_time_s)
        with open(os.path.join(args.out, "config.txt"), "w", encoding="utf-8") as fh:
            fh.write(manifest.config_text)
        write_manifest(manifest, os.path.join(args.out, "manifest.json"))
    except OSError as exc:
        print(f"doubleris: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if not args.quiet:
        print(_summary(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
