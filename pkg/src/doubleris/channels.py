"""Seeded Rician/Rayleigh channel generation for one network drop.

Every link gets its own counter-based (Philox) stream keyed by
``(master_seed, drop_index, link)``.  Two consequences follow: a drop can be
regenerated bit-exactly in any order or process, and the same link is
identical across topologies that share its endpoints (paired comparisons).

The LoS component has deterministic magnitude ``d**(-los_exponent/2)`` and an
i.i.d. uniform phase per entry, redrawn each drop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .geometry import (
    ConfigurationError,
    MidRelay,
    PathLossParams,
    RelayPair,
    Topology,
    distance,
    path_gain,
)

__all__ = [
    "ChannelParams",
    "ChannelRealization",
    "DropSeed",
    "ConfigurationError",
    "draw_rician_vector",
    "draw_rician_matrix",
    "draw_rayleigh_scalar",
    "realize_drop",
    "link_rng",
    "LINK_CODES",
]


@dataclass(frozen=True)
class ChannelParams:
    rician_k: float = 10.0
    path: PathLossParams = field(default_factory=PathLossParams)
    noise_power: float = 1.0

    def __post_init__(self):
        if not self.rician_k >= 0:
            raise ValueError("Rician K must be non-negative")
        if not self.noise_power > 0:
            raise ValueError("noise power must be positive")

    @property
    def los_weight(self) -> float:
        k = self.rician_k
        return 1.0 if math.isinf(k) else math.sqrt(k / (k + 1.0))

    @property
    def nlos_weight(self) -> float:
        k = self.rician_k
        return 0.0 if math.isinf(k) else math.sqrt(1.0 / (k + 1.0))

    def mean_power(self, d: float, rician: bool = True) -> float:
        """Expected ``|h|**2`` of one entry of a link at distance ``d``."""
        nlos = path_gain(d, self.path.nlos_exponent)
        if not rician:
            return nlos
        los = path_gain(d, self.path.los_exponent)
        return self.los_weight**2 * los + self.nlos_weight**2 * nlos


@dataclass(frozen=True)
class DropSeed:
    master_seed: int
    drop_index: int

    def __post_init__(self):
        if self.master_seed < 0 or self.drop_index < 0:
            raise ValueError("seeds must be non-negative")


# Stable integer tags; part of the seeding contract, never renumber.
LINK_CODES = {
    "h_i1s": 1,
    "h_i2d": 2,
    "g": 3,
    "h_i1r": 4,
    "h_i2r": 5,
    "h_sr": 6,
    "h_rd": 7,
    "h_i1r1": 8,
    "h_i1r2": 9,
    "h_i2r1": 10,
    "h_i2r2": 11,
    "h_sr1": 12,
    "h_r1r2": 13,
    "h_r2d": 14,
}


def link_rng(seed: DropSeed, link: str) -> np.random.Generator:
    ss = np.random.SeedSequence(
        entropy=seed.master_seed, spawn_key=(seed.drop_index, LINK_CODES[link])
    )
    return np.random.Generator(np.random.Philox(ss))


def _check(d, m=1):
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    if int(m) != m or m < 1:
        raise ValueError(f"element count must be a positive integer, got {m}")


def _cn(rng, shape, var):
    z = rng.standard_normal(shape + (2,)).view(np.complex128)[..., 0]
    z *= math.sqrt(var / 2.0)
    return z


def _rician(d, shape, params, rng):
    amp = params.los_weight * math.sqrt(path_gain(d, params.path.los_exponent))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=shape)
    h = _cn(rng, shape, params.nlos_weight**2 * path_gain(d, params.path.nlos_exponent))
    h.real += amp * np.cos(phase)
    h.imag += amp * np.sin(phase)
    return h


def draw_rician_vector(d: float, m: int, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Length-``m`` Rician fading vector for a surface link of length ``d``."""
    _check(d, m)
    return _rician(d, (int(m),), params, rng)


def draw_rician_matrix(d: float, m: int, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """``m x m`` Rician fading matrix for the surface-to-surface link."""
    _check(d, m)
    return _rician(d, (int(m), int(m)), params, rng)


def draw_rayleigh_scalar(d: float, params: ChannelParams, rng: np.random.Generator) -> complex:
    """Zero-mean circular Gaussian with variance ``d**-nlos_exponent``."""
    _check(d)
    return complex(_cn(rng, (), path_gain(d, params.path.nlos_exponent)))


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """All channel coefficients of one drop.

    Relay links that do not exist in the drop's topology are ``None``.
    Arrays are made read-only on construction.
    """

    m: int
    h_i1s: np.ndarray
    h_i2d: np.ndarray
    g: np.ndarray
    h_i1r: Optional[np.ndarray] = None
    h_i2r: Optional[np.ndarray] = None
    h_sr: Optional[complex] = None
    h_rd: Optional[complex] = None
    h_i1r1: Optional[np.ndarray] = None
    h_i1r2: Optional[np.ndarray] = None
    h_i2r1: Optional[np.ndarray] = None
    h_i2r2: Optional[np.ndarray] = None
    h_sr1: Optional[complex] = None
    h_r1r2: Optional[complex] = None
    h_r2d: Optional[complex] = None

    def __post_init__(self):
        m = self.m
        for f in fields(self):
            if f.name == "m":
                continue
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, np.ndarray):
                want = (m, m) if f.name == "g" else (m,)
                if v.shape != want:
                    raise ValueError(f"{f.name} has shape {v.shape}, expected {want}")
                if not np.all(np.isfinite(v)):
                    raise ValueError(f"{f.name} has non-finite entries")
                if v.flags.writeable or v.dtype != np.complex128:
                    v = np.array(v, dtype=np.complex128)
                    v.flags.writeable = False
                object.__setattr__(self, f.name, v)
            else:
                v = complex(v)
                if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                    raise ValueError(f"{f.name} is not finite")
                object.__setattr__(self, f.name, v)

    @property
    def populated(self) -> frozenset:
        return frozenset(
            f.name for f in fields(self) if f.name != "m" and getattr(self, f.name) is not None
        )

    @property
    def has_mid_relay(self) -> bool:
        return self.h_i1r is not None

    @property
    def has_relay_pair(self) -> bool:
        return self.h_i1r1 is not None

    def equals(self, other: "ChannelRealization") -> bool:
        """Bit-exact comparison of every populated channel."""
        if self.m != other.m or self.populated != other.populated:
            return False
        for name in self.populated:
            a, b = getattr(self, name), getattr(other, name)
            if isinstance(a, np.ndarray):
                if a.tobytes() != b.tobytes():
                    return False
            elif a != b:
                return False
        return True


_SHARED = ("h_i1s", "h_i2d", "g")


def realize_drop(
    topology: Topology,
    m: int,
    params: ChannelParams,
    seed: DropSeed,
    shared: Optional[ChannelRealization] = None,
) -> ChannelRealization:
    """Draw every channel of ``topology`` for one drop.

    Parameters
    ----------
    topology : Topology
    m : int
        Reflecting elements per surface.
    params : ChannelParams
    seed : DropSeed
    shared : ChannelRealization, optional
        A realization from the same seed, ``m``, params and surface
        geometry.  Its ``h_i1s``, ``h_i2d`` and ``g`` are reused instead of
        being redrawn; they are bit-identical to a fresh draw by construction.
    """
    _check(1.0, m)
    m = int(m)
    t = topology

    def vec(name, a, b):
        return draw_rician_vector(distance(a, b), m, params, link_rng(seed, name))

    def ray(name, a, b):
        return draw_rayleigh_scalar(distance(a, b), params, link_rng(seed, name))

    if shared is not None and shared.m == m:
        common = {k: getattr(shared, k) for k in _SHARED}
    else:
        common = {
            "h_i1s": vec("h_i1s", t.i1, t.s),
            "h_i2d": vec("h_i2d", t.i2, t.d),
            "g": draw_rician_matrix(distance(t.i1, t.i2), m, params, link_rng(seed, "g")),
        }

    extra = {}
    if isinstance(t.relays, MidRelay):
        r = t.relays.r
        extra = {
            "h_i1r": vec("h_i1r", t.i1, r),
            "h_i2r": vec("h_i2r", t.i2, r),
            "h_sr": ray("h_sr", t.s, r),
            "h_rd": ray("h_rd", r, t.d),
        }
    elif isinstance(t.relays, RelayPair):
        r1, r2 = t.relays.r1, t.relays.r2
        extra = {
            "h_i1r1": vec("h_i1r1", t.i1, r1),
            "h_i1r2": vec("h_i1r2", t.i1, r2),
            "h_i2r1": vec("h_i2r1", t.i2, r1),
            "h_i2r2": vec("h_i2r2", t.i2, r2),
            "h_sr1": ray("h_sr1", t.s, r1),
            "h_r1r2": ray("h_r1r2", r1, r2),
            "h_r2d": ray("h_r2d", r2, t.d),
        }
    elif t.relays is not None:
        raise ConfigurationError(f"unsupported relay arrangement {t.relays!r}")
    for v in (*common.values(), *extra.values()):
        if isinstance(v, np.ndarray):
            v.flags.writeable = False
    return ChannelRealization(m=m, **common, **extra)
