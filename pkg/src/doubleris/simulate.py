"""Monte Carlo sweeps over transmit SNR, surface size and INR.

Drops are paired: at a given axis point every scheme sees the same drop
seeds, and along an SNR or INR axis the channels of a drop are reused for all
points.  Each drop is an independent task; results are reduced in drop order
with compensated summation, so the report does not depend on ``n_jobs``.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channels import ChannelParams, DropSeed, realize_drop
from .geometry import Layout, paper_layout
from .phaseopt import AoSettings, CascadeOperators
from .schemes import (
    InterferenceParams,
    PowerSplit,
    Scheme,
    eval_enhanced_levels,
    eval_ris_only,
    eval_single_relay,
    eval_two_relay,
)

__all__ = [
    "AXES",
    "SweepConfig",
    "PointStats",
    "SweepReport",
    "run_sweep",
    "threshold_crossing",
    "db_to_linear",
    "curve_label",
]

AXES = ("snr_db", "m", "inr_db")


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class SweepConfig:
    """One fully resolved experiment.

    ``axis`` selects which of ``snr_db``, ``m`` or ``inr_db`` is swept over
    ``axis_values``; the others stay at their fixed values.  ``inr_db`` is a
    tuple of levels: the concurrent scheme gets one curve per level.
    """

    schemes: Tuple[Scheme, ...] = tuple(Scheme)
    axis: str = "snr_db"
    axis_values: Tuple[float, ...] = (0.0,)
    m: int = 128
    snr_db: float = 50.0
    inr_db: Tuple[float, ...] = (0.0,)
    trials: int = 500
    master_seed: int = 0
    layout: Layout = field(default_factory=paper_layout)
    channel: ChannelParams = field(default_factory=ChannelParams)
    settings: AoSettings = field(default_factory=AoSettings)
    p1_fraction: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(Scheme(s) for s in self.schemes))
        object.__setattr__(self, "axis_values", tuple(float(v) for v in self.axis_values))
        object.__setattr__(self, "inr_db", tuple(float(v) for v in self.inr_db))
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.axis_values:
            raise ValueError("axis_values must be non-empty")
        if any(b <= a for a, b in zip(self.axis_values, self.axis_values[1:])):
            raise ValueError("axis_values must be strictly increasing")
        if self.axis == "m" and any(v != int(v) or v < 1 for v in self.axis_values):
            raise ValueError("element counts must be positive integers")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not self.inr_db:
            raise ValueError("inr_db needs at least one level")
        if not 0.0 <= self.p1_fraction <= 1.0:
            raise ValueError("p1_fraction must lie in [0, 1]")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")

    def validate_layout(self) -> None:
        for s in self.schemes:
            self.layout.topology(s.relays)


def curve_label(scheme: Scheme, inr_db: Optional[float] = None) -> str:
    if inr_db is None:
        return scheme.value
    return f"{scheme.value}@inr={inr_db:g}dB"


@dataclass(frozen=True)
class PointStats:
    scheme: Scheme
    inr_db: Optional[float]
    axis_value: float
    mean_rate: float
    std_err: float
    trials: int
    mean_iters: Dict[str, float]
    bottlenecks: Dict[str, int]

    @property
    def label(self) -> str:
        return curve_label(self.scheme, self.inr_db)


@dataclass
class SweepReport:
    config: SweepConfig
    points: List[PointStats]
    wall_time_s: float = 0.0

    def curves(self) -> Dict[str, List[PointStats]]:
        out: Dict[str, List[PointStats]] = {}
        for p in self.points:
            out.setdefault(p.label, []).append(p)
        return out

    def curve(self, scheme, inr_db: Optional[float] = None) -> List[PointStats]:
        scheme = Scheme(scheme)
        if scheme is Scheme.ENHANCED and inr_db is None and self.config.axis != "inr_db":
            inr_db = self.config.inr_db[0]
        if scheme is not Scheme.ENHANCED:
            inr_db = None
        return [p for p in self.points if p.scheme is scheme and p.inr_db == inr_db]


# ---------------------------------------------------------------------------
# per-drop evaluation
# ---------------------------------------------------------------------------

def _axis_points(cfg: SweepConfig):
    """Yield ``(m, [(axis_index, snr_db, inr_db_or_None_levels)])`` task groups."""
    if cfg.axis == "m":
        return [(int(v), [(i, cfg.snr_db, None)]) for i, v in enumerate(cfg.axis_values)]
    if cfg.axis == "snr_db":
        return [(cfg.m, [(i, v, None) for i, v in enumerate(cfg.axis_values)])]
    return [(cfg.m, [(i, cfg.snr_db, v) for i, v in enumerate(cfg.axis_values)])]


def _drop_records(cfg: SweepConfig, m: int, drop_index: int, points) -> list:
    seed = DropSeed(cfg.master_seed, drop_index)
    wanted = {s.relays for s in cfg.schemes}
    drops = {}
    base = None
    for arr in ("pair", "mid", None):
        if arr in wanted:
            drops[arr] = realize_drop(cfg.layout.topology(arr), m, cfg.channel, seed, shared=base)
            base = base or drops[arr]
    any_drop = drops.get(None) or base
    ops = CascadeOperators.from_drop(drops.get("pair") or any_drop)
    sigma2 = cfg.channel.noise_power

    records = []
    for idx, snr_db, inr_axis in points:
        p = db_to_linear(snr_db) * sigma2
        rho = p / sigma2
        for s in cfg.schemes:
            if s is Scheme.RIS_ONLY:
                results = [(None, eval_ris_only(any_drop, rho, cfg.settings, ops))]
            elif s is Scheme.SINGLE_RELAY:
                results = [(None, eval_single_relay(drops["mid"], rho, cfg.settings))]
            elif s is Scheme.TWO_RELAY:
                results = [(None, eval_two_relay(drops["pair"], rho, cfg.settings, ops))]
            else:
                power = PowerSplit(p, cfg.p1_fraction * p, p - cfg.p1_fraction * p)
                levels = [inr_axis] if inr_axis is not None else cfg.inr_db
                itf = [InterferenceParams(db_to_linear(lvl)) for lvl in levels]
                res = eval_enhanced_levels(drops["pair"], power, sigma2, itf, cfg.settings, ops)
                tags = [None] if inr_axis is not None else levels
                results = list(zip(tags, res))
            for lvl, r in results:
                records.append((s, lvl, idx, r.rate_bps_hz, r.bottleneck, r.optimizer_iters))
    return records


def _run_group(cfg, m, drop_index, points):
    return drop_index, _drop_records(cfg, m, drop_index, points)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

def _stats(values: Sequence[float]) -> Tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def run_sweep(cfg: SweepConfig, n_jobs: int = 1) -> SweepReport:
    """Average every scheme's rate over ``cfg.trials`` drops at each axis point.

    Parameters
    ----------
    cfg : SweepConfig
    n_jobs : int
        Worker processes (joblib).  The report is identical for any value.

    Raises
    ------
    ConfigurationError
        If the layout lacks relays required by one of the schemes; raised
        before any drop is simulated.
    """
    cfg.validate_layout()
    t0 = time.perf_counter()
    groups = _axis_points(cfg)
    tasks = [(m, d, pts) for m, pts in groups for d in range(cfg.trials)] if cfg.schemes else []
    if n_jobs == 1:
        out = [_run_group(cfg, *t) for t in tasks]
    else:
        from joblib import Parallel, delayed

        out = Parallel(n_jobs=n_jobs)(delayed(_run_group)(cfg, *t) for t in tasks)

    buckets: Dict[tuple, list] = {}
    for drop_index, records in sorted(out, key=lambda x: x[0]):
        for s, lvl, idx, rate, bneck, iters in records:
            buckets.setdefault((s, lvl, idx), []).append((rate, bneck, iters))

    points = []
    order = {s: k for k, s in enumerate(Scheme)}
    for (s, lvl, idx), rows in sorted(
        buckets.items(), key=lambda kv: (order[kv[0][0]], -math.inf if kv[0][1] is None else kv[0][1], kv[0][2])
    ):
        rates = [r for r, _, _ in rows]
        mean, se = _stats(rates)
        keys = sorted({k for _, _, it in rows for k in it})
        mean_iters = {k: math.fsum(it.get(k, 0) for _, _, it in rows) / len(rows) for k in keys}
        points.append(
            PointStats(
                scheme=s,
                inr_db=lvl,
                axis_value=cfg.axis_values[idx],
                mean_rate=mean,
                std_err=se,
                trials=len(rows),
                mean_iters=mean_iters,
                bottlenecks=dict(sorted(Counter(b for _, b, _ in rows).items())),
            )
        )
    return SweepReport(cfg, points, time.perf_counter() - t0)


def threshold_crossing(
    report: SweepReport, scheme, target_rate: float, inr_db: Optional[float] = None
) -> Optional[float]:
    """Axis value where the mean-rate curve first reaches ``target_rate``.

    Linear interpolation between the two bracketing points.  Returns ``None``
    if the target is never reached.
    """
    pts = report.curve(scheme, inr_db)
    xs = np.array([p.axis_value for p in pts])
    ys = np.array([p.mean_rate for p in pts])
    return _first_crossing(xs, ys, target_rate)


def _first_crossing(xs, ys, target):
    for k, y in enumerate(ys):
        if y >= target:
            if k == 0:
                return float(xs[0])
            x0, x1, y0, y1 = xs[k - 1], xs[k], ys[k - 1], y
            return float(x0 + (target - y0) * (x1 - x0) / (y1 - y0))
    return None
