"""Node placement and distance-based path gains.

All gains are linear power-domain quantities. The reference topology places
the source at the origin, the two surfaces 20 m above the S-D axis and the
relays on the axis itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

__all__ = [
    "ConfigurationError",
    "Point2D",
    "MidRelay",
    "RelayPair",
    "Topology",
    "PathLossParams",
    "distance",
    "path_gain",
    "paper_topology",
    "Layout",
    "paper_layout",
]


class ConfigurationError(ValueError):
    """A topology or layout cannot support the requested architecture."""


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinate ({self.x}, {self.y})")


@dataclass(frozen=True)
class MidRelay:
    """A single relay placed between the two surfaces."""

    r: Point2D


@dataclass(frozen=True)
class RelayPair:
    """Two relays, ``r1`` next to the first surface and ``r2`` next to the second."""

    r1: Point2D
    r2: Point2D


Relays = Union[None, MidRelay, RelayPair]


@dataclass(frozen=True)
class Topology:
    """Positions of source, surfaces, destination and (optionally) relays."""

    s: Point2D
    i1: Point2D
    i2: Point2D
    d: Point2D
    relays: Relays = None

    def __post_init__(self):
        for (na, a), (nb, b) in self._used_pairs():
            if distance(a, b) <= 0.0:
                raise ValueError(f"nodes {na} and {nb} coincide")

    def _used_pairs(self):
        nodes = {"S": self.s, "I1": self.i1, "I2": self.i2, "D": self.d}
        pairs = [("I1", "S"), ("I2", "D"), ("I1", "I2")]
        if isinstance(self.relays, MidRelay):
            nodes["R"] = self.relays.r
            pairs += [("I1", "R"), ("I2", "R"), ("S", "R"), ("R", "D")]
        elif isinstance(self.relays, RelayPair):
            nodes["R1"] = self.relays.r1
            nodes["R2"] = self.relays.r2
            pairs += [
                ("I1", "R1"), ("I1", "R2"), ("I2", "R1"), ("I2", "R2"),
                ("S", "R1"), ("R1", "R2"), ("R2", "D"),
            ]
        return [((a, nodes[a]), (b, nodes[b])) for a, b in pairs]

    def with_relays(self, relays: Relays) -> "Topology":
        return Topology(self.s, self.i1, self.i2, self.d, relays)


@dataclass(frozen=True)
class PathLossParams:
    los_exponent: float = 2.3
    nlos_exponent: float = 3.5

    def __post_init__(self):
        if not (self.los_exponent > 0 and self.nlos_exponent > 0):
            raise ValueError("path-loss exponents must be positive")


def distance(a: Point2D, b: Point2D) -> float:
    """Euclidean distance in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


def path_gain(d: float, exponent: float) -> float:
    """Power-domain path gain ``d**-exponent``.

    Raises
    ------
    ValueError
        If ``d`` is not strictly positive.
    """
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    return d ** (-exponent)


_PAPER_NODES = {
    "s": Point2D(0.0, 0.0),
    "i1": Point2D(60.0, 20.0),
    "i2": Point2D(240.0, 20.0),
    "d": Point2D(300.0, 0.0),
    "r": Point2D(150.0, 0.0),
    "r1": Point2D(60.0, 0.0),
    "r2": Point2D(240.0, 0.0),
}


def paper_topology(relays: Optional[str] = None) -> Topology:
    """Reference layout used for the published rate curves.

    Parameters
    ----------
    relays : {None, "mid", "pair"}
        Which relay arrangement to attach.
    """
    n = _PAPER_NODES
    if relays is None or relays == "none":
        rel: Relays = None
    elif relays == "mid":
        rel = MidRelay(n["r"])
    elif relays == "pair":
        rel = RelayPair(n["r1"], n["r2"])
    else:
        raise ValueError(f"unknown relay arrangement {relays!r}")
    return Topology(n["s"], n["i1"], n["i2"], n["d"], rel)


@dataclass(frozen=True)
class Layout:
    """Node positions for every architecture a sweep may evaluate.

    Relay positions are optional; :meth:`topology` refuses arrangements whose
    relays are missing.
    """

    s: Point2D
    i1: Point2D
    i2: Point2D
    d: Point2D
    r: Optional[Point2D] = None
    r1: Optional[Point2D] = None
    r2: Optional[Point2D] = None

    def topology(self, relays: Optional[str]) -> Topology:
        if relays is None or relays == "none":
            rel: Relays = None
        elif relays == "mid":
            if self.r is None:
                raise ConfigurationError("layout has no mid relay position")
            rel = MidRelay(self.r)
        elif relays == "pair":
            if self.r1 is None or self.r2 is None:
                raise ConfigurationError("layout lacks r1/r2 relay positions")
            rel = RelayPair(self.r1, self.r2)
        else:
            raise ValueError(f"unknown relay arrangement {relays!r}")
        return Topology(self.s, self.i1, self.i2, self.d, rel)


def paper_layout() -> Layout:
    return Layout(**_PAPER_NODES)
