"""Proactive URLL/eMBB coexistence simulator.

A predictor forecasts the service type and request time of an incoming URLL
packet; a guard-interval scheduler keeps the predicted slots of the shared
sub-band free of eMBB traffic; the metrics module scores reliability and
utilization both in closed form and from slot-exact timelines.
"""

from .errors import (
    ConfigError,
    EmptySequenceError,
    IncompleteTraceError,
    TraceFormatError,
    UndefinedMetricError,
)
from .timing import TimingConfig, frame_start_slot, frames_to_slots

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "EmptySequenceError",
    "IncompleteTraceError",
    "TraceFormatError",
    "UndefinedMetricError",
    "TimingConfig",
    "frame_start_slot",
    "frames_to_slots",
]
