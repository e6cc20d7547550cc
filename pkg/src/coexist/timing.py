"""Wireless-slot / video-frame time base.

Frames and slots are synchronized: every frame boundary is also a slot
boundary, and a frame holds exactly ``fsr`` slots. Both frames and slots are
indexed from 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

RATIO_TOL = 1e-9


def round_half_away(value: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    if value >= 0:
        return int(math.floor(value + 0.5))
    return -int(math.floor(-value + 0.5))


@dataclass(frozen=True)
class TimingConfig:
    tau_v: float = 1.0 / 30.0
    fsr: int = 33

    def __post_init__(self):
        if isinstance(self.fsr, bool) or not isinstance(self.fsr, int):
            raise ValueError(f"fsr must be an integer, got {self.fsr!r}")
        if self.fsr < 1:
            raise ValueError(f"fsr must be >= 1, got {self.fsr}")
        if not (math.isfinite(self.tau_v) and self.tau_v > 0):
            raise ValueError(f"tau_v must be a positive finite duration, got {self.tau_v!r}")

    @property
    def tau_w(self) -> float:
        """Seconds per wireless slot."""
        return self.tau_v / self.fsr

    @classmethod
    def from_durations(cls, tau_w: float, tau_v: float) -> "TimingConfig":
        """Build from both durations; their ratio must be a whole number."""
        if not (tau_w > 0 and tau_v > 0):
            raise ValueError("slot and frame durations must be positive")
        if tau_w > tau_v:
            raise ValueError(f"slot ({tau_w} s) longer than frame ({tau_v} s)")
        ratio = tau_v / tau_w
        fsr = round_half_away(ratio)
        if abs(ratio - fsr) > RATIO_TOL * max(1.0, ratio):
            raise ValueError(f"tau_v / tau_w = {ratio!r} is not an integer")
        return cls(tau_v=tau_v, fsr=fsr)

    @classmethod
    def from_dict(cls, d: dict | None) -> "TimingConfig":
        d = dict(d or {})
        tau_v = float(d.pop("tau_v_seconds", 1.0 / 30.0))
        fsr = d.pop("fsr", 33)
        if d:
            raise ValueError(f"unknown timing keys: {sorted(d)}")
        if isinstance(fsr, float) and fsr.is_integer():
            fsr = int(fsr)
        return cls(tau_v=tau_v, fsr=fsr)


def frames_to_slots(f: float, cfg: TimingConfig) -> int:
    """Convert a (possibly fractional) frame count to whole slots."""
    f = float(f)
    if not math.isfinite(f) or f < 0:
        raise ValueError(f"frame count must be finite and >= 0, got {f!r}")
    return round_half_away(f * cfg.fsr)


def frame_start_slot(n: int, cfg: TimingConfig) -> int:
    """First slot of frame ``n``."""
    if n < 1:
        raise ValueError(f"frame index must be >= 1, got {n}")
    return (n - 1) * cfg.fsr + 1
