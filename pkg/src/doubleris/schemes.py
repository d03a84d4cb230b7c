"""Per-drop SNR/SINR and achievable rate of the four transmission architectures.

``ris_only``
    S -> I1 -> I2 -> D over both surfaces, one slot.
``single_relay``
    S -> R (direct + I1), R -> D (direct + I2); two slots.
``two_relay``
    S -> R1, R1 -> R2 (direct, both surfaces, double reflection), R2 -> D;
    three slots, one transmitter at a time.
``enhanced``
    As ``two_relay`` but S and R2 transmit concurrently, so a new block leaves
    S every two slots.  R1 sees residual interference of power ``inr * sigma2``
    after cancellation, and D sees the source signal through the double
    reflection as interference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .channels import ChannelRealization, ConfigurationError
from .phaseopt import (
    AoSettings,
    CascadeOperators,
    ao_double_ris,
    ao_second_hop_two_ris,
    coherent_snr,
    mm_fractional_phase,
)

__all__ = [
    "Scheme",
    "PowerSplit",
    "InterferenceParams",
    "SchemeResult",
    "eval_ris_only",
    "eval_single_relay",
    "eval_two_relay",
    "eval_enhanced",
    "achievable_rate",
]


class Scheme(str, Enum):
    RIS_ONLY = "ris_only"
    SINGLE_RELAY = "single_relay"
    TWO_RELAY = "two_relay"
    ENHANCED = "enhanced"

    @property
    def prelog(self) -> Fraction:
        return _PRELOG[self]

    @property
    def relays(self) -> Optional[str]:
        """Relay arrangement the scheme needs (see :func:`geometry.paper_topology`)."""
        return {Scheme.RIS_ONLY: None, Scheme.SINGLE_RELAY: "mid"}.get(self, "pair")


_PRELOG = {
    Scheme.RIS_ONLY: Fraction(1),
    Scheme.SINGLE_RELAY: Fraction(1, 2),
    Scheme.TWO_RELAY: Fraction(1, 3),
    Scheme.ENHANCED: Fraction(1, 2),
}


@dataclass(frozen=True)
class PowerSplit:
    """Source / second-relay power split of the concurrent scheme."""

    p_total: float
    p1: float
    p2: float

    def __post_init__(self):
        if min(self.p_total, self.p1, self.p2) < 0:
            raise ValueError("powers must be non-negative")
        if not math.isclose(self.p1 + self.p2, self.p_total, rel_tol=1e-12, abs_tol=1e-300):
            raise ValueError(f"p1 + p2 = {self.p1 + self.p2} != p_total = {self.p_total}")

    @classmethod
    def equal(cls, p_total: float) -> "PowerSplit":
        return cls(p_total, 0.5 * p_total, 0.5 * p_total)


@dataclass(frozen=True)
class InterferenceParams:
    """Residual inter-relay interference at R1, as a ratio to the noise power."""

    inr: float = 1.0

    def __post_init__(self):
        if not self.inr >= 0:
            raise ValueError("inr must be non-negative")


def achievable_rate(prelog, sinrs) -> float:
    """``prelog * log2(1 + min(sinrs))``."""
    return float(prelog) * math.log1p(min(sinrs)) / math.log(2.0)


@dataclass(frozen=True)
class SchemeResult:
    scheme_id: Scheme
    hop_snrs: Tuple[Tuple[str, float], ...]
    bottleneck: str
    rate_bps_hz: float
    prelog: Fraction
    optimizer_iters: Dict[str, int] = field(default_factory=dict)

    @classmethod
    def build(cls, scheme: Scheme, hops, iters=None) -> "SchemeResult":
        hops = tuple((label, float(v)) for label, v in hops)
        label, worst = min(hops, key=lambda kv: kv[1])
        return cls(
            scheme_id=scheme,
            hop_snrs=hops,
            bottleneck=label,
            rate_bps_hz=achievable_rate(scheme.prelog, [worst]),
            prelog=scheme.prelog,
            optimizer_iters=dict(iters or {}),
        )

    @property
    def min_sinr(self) -> float:
        return min(v for _, v in self.hop_snrs)


def _need(cond, what):
    if not cond:
        raise ConfigurationError(f"drop lacks {what} channels")


def eval_ris_only(
    drop: ChannelRealization,
    rho: float,
    settings: AoSettings = AoSettings(),
    ops: Optional[CascadeOperators] = None,
) -> SchemeResult:
    """Single-hop rate through both surfaces with AO-optimized phases."""
    ops = ops or CascadeOperators.from_drop(drop)
    res = ao_double_ris(ops.f, rho, settings)
    return SchemeResult.build(Scheme.RIS_ONLY, [("D", res.snr)], {"ao": res.iters})


def eval_single_relay(
    drop: ChannelRealization,
    rho: float,
    settings: Optional[AoSettings] = None,
    ops: Optional[CascadeOperators] = None,
) -> SchemeResult:
    """Two-hop rate via the mid relay; both hops use closed-form alignment."""
    _need(drop.has_mid_relay, "single-relay")
    g_r = coherent_snr(rho, drop.h_sr, drop.h_i1r * drop.h_i1s)
    g_d = coherent_snr(rho, drop.h_rd, drop.h_i2d * drop.h_i2r)
    return SchemeResult.build(Scheme.SINGLE_RELAY, [("R", g_r), ("D", g_d)])


def _first_hop_amp2(drop) -> float:
    return coherent_snr(1.0, drop.h_sr1, drop.h_i1r1 * drop.h_i1s)


def _second_hop(drop, rho, settings, ops):
    ops = ops or CascadeOperators.from_drop(drop)
    return ao_second_hop_two_ris(ops.q_mat, ops.u1, ops.u2, ops.h_r1r2, rho, settings)


def eval_two_relay(
    drop: ChannelRealization,
    rho: float,
    settings: AoSettings = AoSettings(),
    ops: Optional[CascadeOperators] = None,
) -> SchemeResult:
    """Three-hop, one-transmitter-at-a-time rate via R1 and R2."""
    _need(drop.has_relay_pair, "two-relay")
    g_r1 = rho * _first_hop_amp2(drop)
    hop2 = _second_hop(drop, rho, settings, ops)
    g_d = coherent_snr(rho, drop.h_r2d, drop.h_i2d * drop.h_i2r2)
    return SchemeResult.build(
        Scheme.TWO_RELAY, [("R1", g_r1), ("R2", hop2.snr), ("D", g_d)], {"ao": hop2.iters}
    )


def eval_enhanced(
    drop: ChannelRealization,
    power: PowerSplit,
    sigma2: float = 1.0,
    interference: InterferenceParams = InterferenceParams(),
    settings: AoSettings = AoSettings(),
    ops: Optional[CascadeOperators] = None,
) -> SchemeResult:
    """Concurrent S->R1 / R2->D transmission with a 1/2 pre-log.

    R1 -> R2 still runs alone at full power ``p_total``; the destination phases
    are chosen by the MM fractional solver against the source's interference,
    with the first-surface phases fixed to serve R1.
    """
    (res,) = eval_enhanced_levels(drop, power, sigma2, [interference], settings, ops)
    return res


def eval_enhanced_levels(
    drop: ChannelRealization,
    power: PowerSplit,
    sigma2: float,
    interference: Sequence[InterferenceParams],
    settings: AoSettings = AoSettings(),
    ops: Optional[CascadeOperators] = None,
) -> List[SchemeResult]:
    """:func:`eval_enhanced` for several INR levels, sharing the optimizer runs.

    Only the R1 SINR depends on the residual interference, so the R1->R2 AO
    and the destination MM run once.
    """
    _need(drop.has_relay_pair, "two-relay")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    ops = ops or CascadeOperators.from_drop(drop)
    amp2 = _first_hop_amp2(drop)
    hop2 = _second_hop(drop, power.p_total / sigma2, settings, ops)
    mm = mm_fractional_phase(ops.a_vec, ops.b_vec, ops.h_r2d, power.p1, power.p2, sigma2, settings)
    iters = {"ao": hop2.iters, "mm": mm.state.iters}
    out = []
    for itf in interference:
        g_r1 = power.p1 * amp2 / (itf.inr * sigma2 + sigma2)
        out.append(SchemeResult.build(
            Scheme.ENHANCED, [("R1", g_r1), ("R2", hop2.snr), ("D", mm.sinr)], iters
        ))
    return out
