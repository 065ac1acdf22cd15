"""Reliability propagation between agents exchanging messages."""

from .algebra import (
    DEFAULT_DIM,
    Reliability,
    align_dimensions,
    and_combine,
    average,
    clamp,
    dominance_weights,
    lift_elementwise,
    or_combine,
    weighted_mean,
)
from .engine import EngineState, TraceRecord, format_trace, run_event, run_scenario
from .propagation import PropagationConfig
from .scenario import parse_scenario

__version__ = "0.1.0"
