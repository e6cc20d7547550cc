"""Guard-interval planning and slot-exact occupancy of the shared sub-band.

Slots are numbered 1..horizon relative to the end of the observation window.
Three eMBB policies are modelled on the shared sub-band:

* proactive  - eMBB fills every slot except the planned guard interval;
* orthogonal - eMBB never uses the shared sub-band;
* greedy     - eMBB fills every slot.

Under the proactive policy a URLL packet that starts in a free slot holds the
band until it completes; eMBB then resumes, including in whatever is left of
the guard. So a packet succeeds exactly when its first slot lies in the guard.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .predictor import Prediction
from .scenario import URLL, DataPoint
from .timing import TimingConfig, frames_to_slots


class SlotState(enum.IntEnum):
    IDLE = 0
    EMBB_ONLY = 1
    URLL_ONLY = 2
    COLLISION = 3


# one character per slot in timeline dumps
STATE_CHARS = ".eUX"


class Policy(str, enum.Enum):
    PROACTIVE = "proactive"
    ORTHOGONAL = "orthogonal"
    GREEDY = "greedy"


@dataclass(frozen=True)
class GuardConfig:
    t_g_frames: float
    t_g_slots: int

    @classmethod
    def from_frames(cls, t_g_frames: float, timing: TimingConfig) -> "GuardConfig":
        return cls(float(t_g_frames), frames_to_slots(t_g_frames, timing))

    @classmethod
    def from_slots(cls, t_g_slots: int, timing: TimingConfig) -> "GuardConfig":
        if t_g_slots < 0:
            raise ValueError("guard half-width must be >= 0")
        return cls(t_g_slots / timing.fsr, int(t_g_slots))

    @property
    def width(self) -> int:
        return 2 * self.t_g_slots + 1


@dataclass(frozen=True)
class GuardInterval:
    """Reserved slots ``[lo, hi]`` around the predicted start ``x_hat``."""

    lo: int
    hi: int
    x_hat: int

    def contains(self, slot: int) -> bool:
        return self.lo <= slot <= self.hi

    def clipped(self, horizon: int) -> tuple[int, int]:
        """The part of the guard inside ``[1, horizon]``; empty when lo > hi."""
        return self.lo, min(self.hi, horizon)


def predicted_start(pred: Prediction, timing: TimingConfig) -> int:
    return frames_to_slots(pred.y_rt_hat, timing) + 1


def plan_guard(pred: Prediction, guard: GuardConfig, timing: TimingConfig) -> GuardInterval | None:
    if pred.y_type_hat != URLL:
        return None
    x_hat = predicted_start(pred, timing)
    return GuardInterval(max(1, x_hat - guard.t_g_slots), x_hat + guard.t_g_slots, x_hat)


@dataclass
class SlotTimeline:
    u: int
    states: np.ndarray  # int8 SlotState per slot; index 0 is slot 1
    packet_success: int | None  # None when the point carries no URLL packet

    @property
    def horizon(self) -> int:
        return len(self.states)

    @property
    def idle_slots(self) -> int:
        return int(np.count_nonzero(self.states == SlotState.IDLE))

    @property
    def occupied_slots(self) -> int:
        return self.horizon - self.idle_slots

    def state(self, slot: int) -> SlotState:
        return SlotState(int(self.states[slot - 1]))

    def dump(self) -> str:
        return "".join(STATE_CHARS[s] for s in self.states)


def build_timeline(dp: DataPoint, guard: GuardInterval | None, policy: Policy | str,
                   horizon: int) -> SlotTimeline:
    policy = Policy(policy)
    has_packet = dp.y_type == URLL
    if has_packet and horizon < dp.packet_end:
        raise ValueError(f"horizon {horizon} shorter than packet end slot {dp.packet_end} (u={dp.u})")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")

    embb = np.ones(horizon, dtype=bool)
    if policy is Policy.ORTHOGONAL:
        embb[:] = False
    elif policy is Policy.PROACTIVE and guard is not None:
        lo, hi = guard.clipped(horizon)
        if lo <= hi:
            embb[lo - 1:hi] = False

    urll = np.zeros(horizon, dtype=bool)
    success = None
    if has_packet:
        start, end = dp.x - 1, dp.packet_end
        urll[start:end] = True
        if not embb[start]:
            # deferral: eMBB stays off until the packet completes, then
            # reclaims the rest of the guard
            embb[start:end] = False
            if policy is Policy.PROACTIVE and guard is not None:
                embb[end:min(guard.hi, horizon)] = True
        success = int(not np.any(embb[start:end]))

    states = embb.astype(np.int8) + 2 * urll.astype(np.int8)
    return SlotTimeline(dp.u, states, success)
