"""Reliability, utilization, classification and request-time statistics.

Expected reliability and utilization average over true-URLL points only.
Per-point utilization counts idle slots of the shared sub-band over a horizon
of ``rho`` slots:

* predicted URLL, packet starts inside the guard: the slots from the guard
  start up to the packet start, ``x - lo`` (``x - x_hat + T_G`` unclamped);
* predicted URLL, packet starts outside: the whole guard, ``2 T_G + 1`` slots
  when it fits in ``[1, rho]`` and the packet does not overlap it;
* anything else: no idle slots.

The guard is taken as actually realised, i.e. clamped at slot 1 and cut at the
horizon, with guard slots covered by a colliding packet counted as used. This
keeps the closed form equal, slot for slot, to ``scheduler.build_timeline``.
``literal_utilization`` keeps the unclamped textbook form for comparison.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .errors import ConfigError, UndefinedMetricError
from .predictor import Prediction
from .scenario import URLL, DataPoint
from .scheduler import (
    GuardConfig,
    GuardInterval,
    Policy,
    SlotTimeline,
    build_timeline,
    plan_guard,
)
from .timing import TimingConfig


@dataclass(frozen=True)
class EventFlags:
    e_s: bool
    e_t: bool
    urll: bool = True


@dataclass(frozen=True)
class MetricsConfig:
    rho: int
    guard: GuardConfig

    def __post_init__(self):
        if self.rho < 1:
            raise ConfigError(f"rho must be >= 1, got {self.rho}")

    @property
    def t_g_slots(self) -> int:
        return self.guard.t_g_slots


def default_rho(points: Iterable[DataPoint], t_g_slots: int) -> int:
    """Smallest horizon covering every packet plus a full guard on each side."""
    return max(dp.packet_end for dp in points) + 2 * t_g_slots


def check_rho(rho: int, points: Sequence[DataPoint], t_g_slots: int, timing: TimingConfig) -> None:
    if not points:
        return
    need = max(max(dp.packet_end for dp in points), t_g_slots + max(dp.y_rt for dp in points) * timing.fsr)
    if rho < need:
        raise ConfigError(f"rho = {rho} too small; packets and guard need at least {need} slots")


def events(dp: DataPoint, pred: Prediction, guard: GuardInterval | None) -> EventFlags:
    urll = dp.y_type == URLL
    e_s = urll and pred.y_type_hat == URLL
    e_t = guard is not None and guard.contains(dp.x)
    return EventFlags(e_s, e_t, urll)


def reliability_point(flags: EventFlags) -> int:
    return int(flags.e_s and flags.e_t)


def _overlap(a_lo: int, a_hi: int, b_lo: int, b_hi: int) -> int:
    return max(0, min(a_hi, b_hi) - max(a_lo, b_lo) + 1)


def idle_slots_point(flags: EventFlags, dp: DataPoint, x_hat: int | None, cfg: MetricsConfig) -> int:
    if not flags.e_s:
        return 0
    t_g = cfg.t_g_slots
    lo = max(1, x_hat - t_g)
    if flags.e_t:
        return dp.x - lo
    hi = min(x_hat + t_g, cfg.rho)
    if lo > hi:
        return 0
    return (hi - lo + 1) - _overlap(lo, hi, dp.x, dp.packet_end)


def utilization_point(flags: EventFlags, dp: DataPoint, x_hat: int | None, cfg: MetricsConfig) -> float:
    return 1.0 - idle_slots_point(flags, dp, x_hat, cfg) / cfg.rho


def literal_utilization(flags: EventFlags, x: int, x_hat: int, t_g_slots: int, rho: int) -> float:
    miss = int(flags.e_s and not flags.e_t)
    hit = int(flags.e_s and flags.e_t)
    return 1.0 - (miss * (2 * t_g_slots + 1) + hit * (x - x_hat + t_g_slots)) / rho


def _urll_only(flags: Iterable[EventFlags]) -> list[EventFlags]:
    out = [f for f in flags if f.urll]
    if not out:
        raise UndefinedMetricError("no true-URLL data points to average over")
    return out


def expected_reliability(flags: Iterable[EventFlags]) -> float:
    urll = _urll_only(flags)
    return 100.0 * sum(reliability_point(f) for f in urll) / len(urll)


def expected_utilization(points: Iterable[tuple[EventFlags, float]]) -> float:
    zs = [z for f, z in points if f.urll]
    if not zs:
        raise UndefinedMetricError("no true-URLL data points to average over")
    return 100.0 * math.fsum(zs) / len(zs)


def timeline_metrics(timelines: Iterable[SlotTimeline]) -> tuple[float, float]:
    """Slot-exact (R%, Z%) over the timelines that carry a URLL packet."""
    urll = [t for t in timelines if t.packet_success is not None]
    if not urll:
        raise UndefinedMetricError("no URLL timelines")
    r = 100.0 * sum(t.packet_success for t in urll) / len(urll)
    z = 100.0 * math.fsum(1.0 - t.idle_slots / t.horizon for t in urll) / len(urll)
    return r, z


@dataclass(frozen=True)
class ClassificationMetrics:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def precision(self) -> float | None:
        d = self.tp + self.fp
        return self.tp / d if d else None

    @property
    def recall(self) -> float | None:
        d = self.tp + self.fn
        return self.tp / d if d else None

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    def pairs(self) -> list[tuple[int, int]]:
        """Label pairs reproducing these counts."""
        return [(1, 1)] * self.tp + [(0, 1)] * self.fp + [(0, 0)] * self.tn + [(1, 0)] * self.fn


def classification_metrics(pairs: Iterable[tuple[int, int]]) -> ClassificationMetrics:
    """Confusion counts for (y_type, y_type_hat) pairs with URLL as positive."""
    tp = fp = tn = fn = 0
    for y, y_hat in pairs:
        if y == 1:
            if y_hat == 1:
                tp += 1
            else:
                fn += 1
        elif y_hat == 1:
            fp += 1
        else:
            tn += 1
    if tp + fp + tn + fn == 0:
        raise UndefinedMetricError("no predictions to score")
    return ClassificationMetrics(tp, fp, tn, fn)


@dataclass(frozen=True)
class RtGroup:
    mean: float
    msd: float  # mean squared deviation about the group mean
    count: int

    @property
    def std(self) -> float:
        return math.sqrt(self.msd)


def grouped_rt_stats(pairs: Iterable[tuple[int, float]]) -> dict[int, RtGroup]:
    """Mean and spread of predicted request times, grouped by true n'."""
    groups: dict[int, list[float]] = {}
    for n, y_hat in pairs:
        groups.setdefault(int(n), []).append(float(y_hat))
    out = {}
    for n in sorted(groups):
        vals = groups[n]
        # shifting by the minimum keeps constant groups exact
        m0 = min(vals)
        mean = m0 + math.fsum(v - m0 for v in vals) / len(vals)
        msd = math.fsum((v - mean) ** 2 for v in vals) / len(vals)
        out[n] = RtGroup(mean, msd, len(vals))
    return out


@dataclass
class MetricsReport:
    t_g_frames: float
    t_g_slots: int
    rho: int
    n_points: int
    n_urll: int
    er_percent: float
    ez_percent: float
    precision: float | None
    recall: float | None
    accuracy: float
    confusion: ClassificationMetrics
    grouped_rt: dict[int, RtGroup]
    ez_literal_percent: float
    fp_guard_count: int
    fp_guard_slots: int
    timeline_policy: str | None = None
    timeline_r_percent: float | None = None
    timeline_z_percent: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "t_g_frames": self.t_g_frames,
            "t_g_slots": self.t_g_slots,
            "rho": self.rho,
            "n_points": self.n_points,
            "n_urll": self.n_urll,
            "er_percent": self.er_percent,
            "ez_percent": self.ez_percent,
            "precision": self.precision,
            "recall": self.recall,
            "accuracy": self.accuracy,
            "confusion": asdict(self.confusion),
            "grouped_rt": [
                {"n_prime": n, "mean": g.mean, "std": g.std, "msd": g.msd, "count": g.count}
                for n, g in self.grouped_rt.items()
            ],
            "extended": {
                "ez_literal_percent": self.ez_literal_percent,
                "fp_guard_count": self.fp_guard_count,
                "fp_guard_slots": self.fp_guard_slots,
                "timeline_policy": self.timeline_policy,
                "timeline_r_percent": self.timeline_r_percent,
                "timeline_z_percent": self.timeline_z_percent,
            },
        }
        d.update(self.extra)
        return d


@dataclass
class GuardMetrics:
    er_percent: float
    ez_percent: float
    ez_literal_percent: float
    n_urll: int
    fp_guard_count: int
    fp_guard_slots: int
    timeline_r_percent: float | None = None
    timeline_z_percent: float | None = None


def guard_metrics(pairs: Sequence[tuple[DataPoint, Prediction]], timing: TimingConfig, cfg: MetricsConfig,
                  timeline_policy: Policy | str | None = None) -> GuardMetrics:
    """The guard-dependent metrics of one trace; ``pairs`` must be sorted by ``u``."""
    flag_z = []
    literal = []
    fp_count = fp_slots = 0
    timelines = []
    for dp, pred in pairs:
        g = plan_guard(pred, cfg.guard, timing)
        f = events(dp, pred, g)
        x_hat = g.x_hat if g else None
        flag_z.append((f, utilization_point(f, dp, x_hat, cfg)))
        if f.urll:
            literal.append(literal_utilization(f, dp.x, x_hat or 0, cfg.t_g_slots, cfg.rho))
        elif g is not None:
            lo, hi = g.clipped(cfg.rho)
            fp_count += 1
            fp_slots += max(0, hi - lo + 1)
        if timeline_policy is not None:
            timelines.append(build_timeline(dp, g, timeline_policy, cfg.rho))
    flags = [f for f, _ in flag_z]
    out = GuardMetrics(
        er_percent=expected_reliability(flags),
        ez_percent=expected_utilization(flag_z),
        ez_literal_percent=100.0 * math.fsum(literal) / len(literal),
        n_urll=len(literal),
        fp_guard_count=fp_count,
        fp_guard_slots=fp_slots,
    )
    if timeline_policy is not None:
        out.timeline_r_percent, out.timeline_z_percent = timeline_metrics(timelines)
    return out


def evaluate(pairs: Sequence[tuple[DataPoint, Prediction]], timing: TimingConfig, guard: GuardConfig,
             rho: int | None = None, timeline_policy: Policy | str | None = None) -> MetricsReport:
    """Score one prediction trace at one guard width.

    ``pairs`` are processed in ascending ``u``. With ``timeline_policy`` set,
    a slot timeline is also built for every point under that policy and the
    slot-exact R% and Z% are reported alongside the closed forms.
    """
    pairs = sorted(pairs, key=lambda p: p[0].u)
    points = [dp for dp, _ in pairs]
    if not points:
        raise UndefinedMetricError("nothing to evaluate")
    if rho is None:
        rho = default_rho(points, guard.t_g_slots)
    check_rho(rho, points, guard.t_g_slots, timing)
    gm = guard_metrics(pairs, timing, MetricsConfig(rho, guard), timeline_policy)
    conf = classification_metrics((dp.y_type, pred.y_type_hat) for dp, pred in pairs)
    return MetricsReport(
        t_g_frames=guard.t_g_frames,
        t_g_slots=guard.t_g_slots,
        rho=rho,
        n_points=len(points),
        n_urll=gm.n_urll,
        er_percent=gm.er_percent,
        ez_percent=gm.ez_percent,
        precision=conf.precision,
        recall=conf.recall,
        accuracy=conf.accuracy,
        confusion=conf,
        grouped_rt=grouped_rt_stats((dp.y_rt, pred.y_rt_hat) for dp, pred in pairs),
        ez_literal_percent=gm.ez_literal_percent,
        fp_guard_count=gm.fp_guard_count,
        fp_guard_slots=gm.fp_guard_slots,
        timeline_policy=Policy(timeline_policy).value if timeline_policy is not None else None,
        timeline_r_percent=gm.timeline_r_percent,
        timeline_z_percent=gm.timeline_z_percent,
    )
