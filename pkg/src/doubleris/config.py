"""Flat ``key = value`` experiment configuration with built-in presets.

Example::

    preset = fig3
    trials = 200
    sweep.values = 100, 200, 300
    channel.rician_k_db = 10

Keys use dotted sections; ``#`` starts a comment.  A ``preset`` key (or the
``preset`` argument) is applied first and every other key overrides it.
Decibel values are converted to linear here and nowhere else.
"""

from __future__ import annotations

import math
import os
from dataclasses import replace
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .geometry import PathLossParams, Point2D, paper_layout
from .schemes import Scheme
from .simulate import AXES, SweepConfig

__all__ = ["ConfigError", "PRESETS", "preset_config", "parse_config", "parse_config_text", "format_config"]


class ConfigError(ValueError):
    """Malformed or out-of-range configuration entry."""

    def __init__(self, msg: str, key: Optional[str] = None, line: Optional[int] = None,
                 source: Optional[str] = None):
        where = []
        if source:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if key:
            where.append(f"key '{key}'")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {msg}" if prefix else msg)
        self.key = key
        self.line = line


def _snr_grid():
    return tuple(float(v) for v in range(-10, 61, 5))


PRESETS: Dict[str, SweepConfig] = {
    "fig2": SweepConfig(
        schemes=tuple(Scheme), axis="snr_db", axis_values=_snr_grid(), m=128,
        inr_db=(0.0, 10.0, 20.0), trials=500,
    ),
    "fig3": SweepConfig(
        schemes=tuple(Scheme), axis="m",
        axis_values=(50, 100, 150, 200, 250, 300, 400, 500, 600, 700, 800, 900, 1000, 1100, 1200),
        snr_db=50.0, inr_db=(0.0,), trials=500,
    ),
    "appendix-props": SweepConfig(
        schemes=(Scheme.ENHANCED,), axis="m", axis_values=(1, 2, 4, 8, 16),
        snr_db=30.0, inr_db=(0.0,), trials=1000,
    ),
}


def preset_config(name: str) -> SweepConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", key="preset")


# ---------------------------------------------------------------------------
# value parsers
# ---------------------------------------------------------------------------

def _floats(text: str) -> Tuple[float, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("expected at least one number")
    return tuple(float(p) for p in parts)


def _float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v) and v != math.inf:
        raise ValueError(f"non-finite value {text!r}")
    return v


def _int(text: str) -> int:
    v = float(text)
    if v != int(v):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _point(text: str) -> Optional[Point2D]:
    if text.strip().lower() == "none":
        return None
    xy = _floats(text)
    if len(xy) != 2:
        raise ValueError("expected 'x, y'")
    return Point2D(*xy)


def _schemes(text: str) -> Tuple[Scheme, ...]:
    if text.strip().lower() in ("", "none"):
        return ()
    return tuple(Scheme(p.strip()) for p in text.split(",") if p.strip())


def _init(text: str):
    t = text.strip().lower()
    return t if t in ("ones", "spectral") else _int(text)


_NODES = ("s", "i1", "i2", "d", "r", "r1", "r2")

# key -> (parser, section, attribute)
_KEYS = {
    "schemes": (_schemes, None, "schemes"),
    "trials": (_int, None, "trials"),
    "seed": (_int, None, "master_seed"),
    "sweep.axis": (str.strip, None, "axis"),
    "sweep.values": (_floats, None, "axis_values"),
    "fixed.m": (_int, None, "m"),
    "fixed.snr_db": (_float, None, "snr_db"),
    "fixed.inr_db": (_floats, None, "inr_db"),
    "power.p1_fraction": (_float, None, "p1_fraction"),
    "channel.rician_k": (_float, "channel", "rician_k"),
    "channel.rician_k_db": (_float, "channel", "rician_k_db"),
    "channel.noise_power": (_float, "channel", "noise_power"),
    "channel.los_exponent": (_float, "path", "los_exponent"),
    "channel.nlos_exponent": (_float, "path", "nlos_exponent"),
    "optimizer.max_iters": (_int, "settings", "max_iters"),
    "optimizer.rel_tol": (_float, "settings", "rel_tol"),
    "optimizer.init": (_init, "settings", "init"),
    "optimizer.stop_on": (str.strip, "settings", "stop_on"),
    "topology.preset": (str.strip, "topology", "preset"),
    **{f"topology.{n}": (_point, "layout", n) for n in _NODES},
}


def _read_lines(text: str, source=None):
    """Yield ``(line_no, key, raw_value)``; reject duplicates and malformed lines."""
    seen = {}
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=no, source=source)
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in _KEYS and key != "preset":
            raise ConfigError("unknown key", key=key, line=no, source=source)
        if key in seen:
            raise ConfigError(f"duplicate key (first on line {seen[key]})", key=key, line=no,
                              source=source)
        seen[key] = no
        yield no, key, value


def _apply(base: SweepConfig, entries: Iterable[Tuple[Optional[int], str, str]], source=None) -> SweepConfig:
    top, channel, path, settings, layout = {}, {}, {}, {}, {}
    buckets = {None: top, "channel": channel, "path": path, "settings": settings,
               "layout": layout, "topology": layout}
    lines = {}
    for no, key, raw in entries:
        parser, section, attr = _KEYS[key]
        try:
            value = parser(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc), key=key, line=no, source=source) from None
        buckets[section][attr] = value
        lines[attr] = (no, key)

    def fail(exc, attrs):
        for a in attrs:
            if a in lines:
                no, key = lines[a]
                raise ConfigError(str(exc), key=key, line=no, source=source) from None
        raise ConfigError(str(exc), source=source) from None

    try:
        lay = base.layout
        if layout.pop("preset", None) is not None:
            lay = paper_layout()
        if layout:
            lay = replace(lay, **layout)
    except ValueError as exc:
        fail(exc, _NODES)

    try:
        ch = base.channel
        if "rician_k_db" in channel:
            if "rician_k" in channel:
                raise ValueError("give either channel.rician_k or channel.rician_k_db")
            channel["rician_k"] = 10.0 ** (channel.pop("rician_k_db") / 10.0)
        if path:
            channel["path"] = replace(ch.path, **path) if ch.path else PathLossParams(**path)
        ch = replace(ch, **channel)
    except ValueError as exc:
        fail(exc, ("rician_k", "rician_k_db", "noise_power", "los_exponent", "nlos_exponent"))

    try:
        st = replace(base.settings, **settings)
    except ValueError as exc:
        fail(exc, ("max_iters", "rel_tol", "init", "stop_on"))

    if "axis" in top and top["axis"] not in AXES:
        fail(ValueError(f"axis must be one of {AXES}"), ("axis",))
    try:
        return replace(base, layout=lay, channel=ch, settings=st, **top)
    except ValueError as exc:
        fail(exc, ("trials", "axis_values", "axis", "m", "inr_db", "p1_fraction",
                   "master_seed", "schemes", "snr_db"))


def parse_config_text(text: str, preset: Optional[str] = None,
                      overrides: Optional[Mapping[str, str]] = None, source=None) -> SweepConfig:
    """Resolve configuration text (plus optional preset and overrides)."""
    entries = list(_read_lines(text, source))
    preset_entries = [e for e in entries if e[1] == "preset"]
    name = preset
    if preset_entries:
        no, _, value = preset_entries[0]
        if preset is not None and preset != value:
            raise ConfigError(f"conflicts with requested preset {preset!r}", key="preset", line=no,
                              source=source)
        name = value
    base = preset_config(name) if name else SweepConfig()
    entries = [e for e in entries if e[1] != "preset"]
    for key, value in (overrides or {}).items():
        if key not in _KEYS:
            raise ConfigError("unknown key", key=key, source="override")
        entries = [e for e in entries if e[1] != key] + [(None, key, str(value))]
    return _apply(base, entries, source)


def parse_config(path: Optional[os.PathLike] = None, preset: Optional[str] = None,
                 overrides: Optional[Mapping[str, str]] = None) -> SweepConfig:
    """Build a :class:`SweepConfig` from a file and/or a preset name.

    Parameters
    ----------
    path : path-like, optional
        Config file.  ``None`` means an empty file.
    preset : str, optional
        ``fig2``, ``fig3`` or ``appendix-props``.
    overrides : mapping, optional
        ``key -> raw value`` entries applied last (used by CLI flags).

    Raises
    ------
    ConfigError
        Unknown keys, malformed values or invariant violations; the message
        names the key and the line.
    """
    text = ""
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    return parse_config_text(text, preset, overrides, source=str(path) if path else None)


def _fmt(v) -> str:
    return repr(float(v))


def format_config(cfg: SweepConfig) -> str:
    """Serialize ``cfg`` so that ``parse_config_text(format_config(cfg)) == cfg``."""
    lines = [
        f"schemes = {', '.join(s.value for s in cfg.schemes) or 'none'}",
        f"trials = {cfg.trials}",
        f"seed = {cfg.master_seed}",
        f"sweep.axis = {cfg.axis}",
        f"sweep.values = {', '.join(_fmt(v) for v in cfg.axis_values)}",
        f"fixed.m = {cfg.m}",
        f"fixed.snr_db = {_fmt(cfg.snr_db)}",
        f"fixed.inr_db = {', '.join(_fmt(v) for v in cfg.inr_db)}",
        f"power.p1_fraction = {_fmt(cfg.p1_fraction)}",
        f"channel.rician_k = {_fmt(cfg.channel.rician_k)}",
        f"channel.noise_power = {_fmt(cfg.channel.noise_power)}",
        f"channel.los_exponent = {_fmt(cfg.channel.path.los_exponent)}",
        f"channel.nlos_exponent = {_fmt(cfg.channel.path.nlos_exponent)}",
        f"optimizer.max_iters = {cfg.settings.max_iters}",
        f"optimizer.rel_tol = {_fmt(cfg.settings.rel_tol)}",
        f"optimizer.init = {cfg.settings.init}",
        f"optimizer.stop_on = {cfg.settings.stop_on}",
    ]
    for n in _NODES:
        p = getattr(cfg.layout, n)
        lines.append(f"topology.{n} = " + ("none" if p is None else f"{_fmt(p.x)}, {_fmt(p.y)}"))
    return "\n".join(lines) + "\n"
