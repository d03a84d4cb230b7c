"""Relay-aided double-surface link simulator and phase-shift optimizers."""

__version__ = "0.1.0"

from .geometry import Point2D, Topology, PathLossParams, paper_topology, paper_layout  # noqa: E402
from .channels import ChannelParams, ChannelRealization, DropSeed, realize_drop  # noqa: E402
from .phaseopt import (  # noqa: E402
    AoSettings,
    CascadeOperators,
    align_to_reference,
    ao_double_ris,
    ao_second_hop_two_ris,
    coherent_snr,
    lambda_max_span2,
    mm_fractional_phase,
)
from .schemes import (  # noqa: E402
    InterferenceParams,
    PowerSplit,
    Scheme,
    SchemeResult,
    eval_enhanced,
    eval_ris_only,
    eval_single_relay,
    eval_two_relay,
)
from .simulate import SweepConfig, SweepReport, run_sweep, threshold_crossing  # noqa: E402

__all__ = [
    "Point2D", "Topology", "PathLossParams", "paper_topology", "paper_layout",
    "ChannelParams", "ChannelRealization", "DropSeed", "realize_drop",
    "AoSettings", "CascadeOperators", "align_to_reference", "ao_double_ris",
    "ao_second_hop_two_ris", "coherent_snr", "lambda_max_span2", "mm_fractional_phase",
    "InterferenceParams", "PowerSplit", "Scheme", "SchemeResult", "eval_enhanced",
    "eval_ris_only", "eval_single_relay", "eval_two_relay",
    "SweepConfig", "SweepReport", "run_sweep", "threshold_crossing",
]
