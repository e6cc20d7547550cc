"""Guard-width sweep and baseline comparison over a fixed prediction trace."""

from __future__ import annotations

import csv
from typing import Iterable, Sequence

from .metrics import (
    MetricsConfig,
    check_rho,
    classification_metrics,
    default_rho,
    guard_metrics,
    timeline_metrics,
)
from .predictor import Prediction
from .scenario import DataPoint
from .scheduler import GuardConfig, Policy, build_timeline, plan_guard
from .timing import TimingConfig

SWEEP_COLUMNS = (
    "t_g_frames", "t_g_slots", "rho", "er_percent", "ez_percent",
    "precision", "recall", "accuracy",
    "fp_guard_count", "fp_guard_slots", "ez_literal_percent",
    "timeline_r_percent", "timeline_z_percent",
)

BASELINE_COLUMNS = ("policy", "t_g_slots", "rho", "r_percent", "z_percent")


def run_sweep(pairs: Sequence[tuple[DataPoint, Prediction]], timing: TimingConfig, grid: Sequence[float],
              rho: int | None = None, policy: Policy | str | None = None) -> list[dict]:
    """One row per guard width, in grid order.

    The trace is fixed, so every row scores the same predictions. Unless
    given, ``rho`` is sized for the widest guard and shared by all rows, so
    utilization values are comparable along the grid.
    """
    pairs = sorted(pairs, key=lambda p: p[0].u)
    points = [dp for dp, _ in pairs]
    guards = [GuardConfig.from_frames(t, timing) for t in grid]
    widest = max(g.t_g_slots for g in guards)
    if rho is None:
        rho = default_rho(points, widest)
    check_rho(rho, points, widest, timing)
    conf = classification_metrics((dp.y_type, pred.y_type_hat) for dp, pred in pairs)

    rows = []
    for guard in guards:
        gm = guard_metrics(pairs, timing, MetricsConfig(rho, guard), policy)
        rows.append({
            "t_g_frames": guard.t_g_frames,
            "t_g_slots": guard.t_g_slots,
            "rho": rho,
            "er_percent": gm.er_percent,
            "ez_percent": gm.ez_percent,
            "precision": conf.precision,
            "recall": conf.recall,
            "accuracy": conf.accuracy,
            "fp_guard_count": gm.fp_guard_count,
            "fp_guard_slots": gm.fp_guard_slots,
            "ez_literal_percent": gm.ez_literal_percent,
            "timeline_r_percent": gm.timeline_r_percent,
            "timeline_z_percent": gm.timeline_z_percent,
        })
    return rows


def run_baselines(pairs: Sequence[tuple[DataPoint, Prediction]], timing: TimingConfig, guard: GuardConfig,
                  rho: int | None = None) -> list[dict]:
    """Slot-exact R% and Z% under each policy; only the proactive one uses the trace."""
    pairs = sorted(pairs, key=lambda p: p[0].u)
    points = [dp for dp, _ in pairs]
    if rho is None:
        rho = default_rho(points, guard.t_g_slots)
    check_rho(rho, points, guard.t_g_slots, timing)
    rows = []
    for policy in (Policy.GREEDY, Policy.ORTHOGONAL, Policy.PROACTIVE):
        timelines = [
            build_timeline(dp, plan_guard(pred, guard, timing) if policy is Policy.PROACTIVE else None, policy, rho)
            for dp, pred in pairs
        ]
        r, z = timeline_metrics(timelines)
        rows.append({"policy": policy.value, "t_g_slots": guard.t_g_slots, "rho": rho,
                     "r_percent": r, "z_percent": z})
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(rows: Iterable[dict], columns: Sequence[str], path_or_file) -> None:
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(row[c]) for c in columns])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)
