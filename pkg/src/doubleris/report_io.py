"""Serialization of sweep reports: CSV table, plot-ready series, run manifest."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

from . import __version__
from .config import format_config
from .simulate import SweepConfig, SweepReport

__all__ = [
    "CSV_COLUMNS",
    "emit_csv",
    "read_csv",
    "emit_plot_data",
    "read_plot_data",
    "RunManifest",
    "write_manifest",
]

CSV_COLUMNS = (
    "curve", "scheme", "inr_db", "axis", "axis_value",
    "mean_rate_bps_hz", "std_err", "trials", "mean_iters_ao", "mean_iters_mm", "bottlenecks",
)


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def _open_for_write(path):
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None


def emit_csv(report: SweepReport, path) -> str:
    """One row per (curve, axis point); floats use round-trip ``repr``."""
    axis = report.config.axis
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p in report.points:
            w.writerow([
                p.label,
                p.scheme.value,
                _num(p.inr_db),
                axis,
                _num(p.axis_value),
                _num(p.mean_rate),
                _num(p.std_err),
                p.trials,
                _num(p.mean_iters.get("ao")),
                _num(p.mean_iters.get("mm")),
                ";".join(f"{k}:{v}" for k, v in p.bottlenecks.items()),
            ])
    return os.fspath(path)


def read_csv(path) -> List[Dict[str, object]]:
    """Parse a file written by :func:`emit_csv` back into typed rows."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out: Dict[str, object] = dict(row)
            for k in ("inr_db", "axis_value", "mean_rate_bps_hz", "std_err",
                      "mean_iters_ao", "mean_iters_mm"):
                out[k] = float(row[k]) if row[k] != "" else None
            out["trials"] = int(row["trials"])
            rows.append(out)
    return rows


def emit_plot_data(report: SweepReport, path) -> str:
    """Whitespace-separated ``x y yerr`` blocks, one per curve.

    Blocks are separated by two blank lines (gnuplot ``index`` convention)
    and preceded by ``# key: value`` header lines.
    """
    axis = report.config.axis
    with _open_for_write(path) as fh:
        first = True
        for label, pts in report.curves().items():
            if not first:
                fh.write("\n\n")
            first = False
            fh.write(f"# curve: {label}\n")
            fh.write(f"# scheme: {pts[0].scheme.value}\n")
            fh.write(f"# inr_db: {_num(pts[0].inr_db) or 'none'}\n")
            fh.write(f"# columns: {axis} mean_rate_bps_hz std_err\n")
            for p in pts:
                fh.write(f"{_num(p.axis_value)} {_num(p.mean_rate)} {_num(p.std_err)}\n")
    return os.fspath(path)


def read_plot_data(path) -> Dict[str, List[tuple]]:
    """Inverse of :func:`emit_plot_data`: ``{curve label: [(x, y, yerr), ...]}``."""
    curves: Dict[str, List[tuple]] = {}
    current = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# curve:"):
                current = line.split(":", 1)[1].strip()
                curves[current] = []
            elif line.startswith("#"):
                continue
            else:
                curves[current].append(tuple(float(t) for t in line.split()))
    return curves


@dataclass
class RunManifest:
    """Everything needed to replay a run exactly."""

    config_text: str
    outputs: Dict[str, str]
    config_path: Optional[str] = None
    preset: Optional[str] = None
    master_seed: int = 0
    tool_version: str = __version__
    timestamp: str = field(
        default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    )
    wall_time_s: float = 0.0

    @classmethod
    def for_run(cls, cfg: SweepConfig, outputs, config_path=None, preset=None, wall_time_s=0.0):
        return cls(config_text=format_config(cfg), outputs=dict(outputs),
                   config_path=None if config_path is None else os.fspath(config_path),
                   preset=preset, master_seed=cfg.master_seed, wall_time_s=wall_time_s)


def write_manifest(manifest: RunManifest, path) -> str:
    with _open_for_write(path) as fh:
        json.dump(asdict(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return os.fspath(path)
