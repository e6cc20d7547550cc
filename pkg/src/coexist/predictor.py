"""Service-type and request-time forecasts.

Every model maps a data point to one ``Prediction``. The stochastic model
draws all of its randomness for point ``u`` from a generator seeded by
``(seed, u)``, so a point's forecast does not depend on which other points are
present or on their order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, IncompleteTraceError, TraceFormatError
from .scenario import EMBB, URLL, DataPoint

TRACE_COLUMNS = ("u", "y_type_hat", "y_rt_hat")


@dataclass(frozen=True)
class Prediction:
    y_type_hat: int
    y_rt_hat: float

    def __post_init__(self):
        if self.y_type_hat not in (EMBB, URLL):
            raise ValueError(f"y_type_hat must be 0 or 1, got {self.y_type_hat!r}")
        if not (math.isfinite(self.y_rt_hat) and self.y_rt_hat >= 0):
            raise ValueError(f"y_rt_hat must be finite and >= 0, got {self.y_rt_hat!r}")


@dataclass(frozen=True)
class StochasticModelSpec:
    """Error model emulating a trained predictor.

    ``rt_bias[n - 1]`` and ``rt_std[n - 1]`` give the request-time error (in
    frames) for points with ``n`` future frames. If ``frame_accuracy`` is set
    the type is decided by a majority vote over ``t_o`` per-frame labels, each
    correct with the given probability (eMBB, URLL), instead of by tpr/fpr.
    """

    tpr: float = 1.0
    fpr: float = 0.0
    rt_bias: tuple[float, ...] = (0.0,) * 16
    rt_std: tuple[float, ...] = (0.0,) * 16
    seed: int = 0
    frame_accuracy: tuple[float, float] | None = None
    t_o: int = 5

    def __post_init__(self):
        object.__setattr__(self, "rt_bias", tuple(float(v) for v in self.rt_bias))
        object.__setattr__(self, "rt_std", tuple(float(v) for v in self.rt_std))
        for name in ("tpr", "fpr"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if len(self.rt_bias) != len(self.rt_std):
            raise ConfigError("rt_bias and rt_std tables must have the same length")
        if not self.rt_bias:
            raise ConfigError("request-time tables are empty")
        if any(s < 0 or not math.isfinite(s) for s in self.rt_std):
            raise ConfigError("rt_std entries must be finite and >= 0")
        if any(not math.isfinite(b) for b in self.rt_bias):
            raise ConfigError("rt_bias entries must be finite")
        if self.frame_accuracy is not None:
            acc = tuple(float(a) for a in self.frame_accuracy)
            if len(acc) != 2 or not all(0.0 <= a <= 1.0 for a in acc):
                raise ConfigError("frame_accuracy must be two probabilities (eMBB, URLL)")
            object.__setattr__(self, "frame_accuracy", acc)
            if self.t_o < 1 or self.t_o % 2 == 0:
                raise ConfigError("majority vote needs an odd window length")

    @property
    def t_p(self) -> int:
        return len(self.rt_bias)

    @classmethod
    def from_dict(cls, d: dict) -> "StochasticModelSpec":
        d = dict(d)
        preset = d.pop("preset", None)
        if preset is not None and preset not in PRESETS:
            raise ConfigError(f"unknown predictor preset {preset!r}; choose from {sorted(PRESETS)}")
        base = PRESETS[preset]() if preset else cls()
        t_p = d.pop("t_p", None)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown predictor keys: {sorted(unknown)}")
        for key in ("rt_bias", "rt_std"):
            if key in d and not isinstance(d[key], (list, tuple)):
                n = t_p or len(getattr(base, key))
                d[key] = [float(d[key])] * n
        fields = {k: getattr(base, k) for k in cls.__dataclass_fields__}
        fields.update(d)
        return cls(**fields)

    def to_dict(self) -> dict:
        return {
            "tpr": self.tpr,
            "fpr": self.fpr,
            "rt_bias": list(self.rt_bias),
            "rt_std": list(self.rt_std),
            "seed": self.seed,
            "frame_accuracy": list(self.frame_accuracy) if self.frame_accuracy else None,
            "t_o": self.t_o,
        }


def fpr_for_precision(tpr: float, precision: float, n_pos: int, n_neg: int) -> float:
    """False-positive rate giving ``precision`` at recall ``tpr`` for the class counts."""
    tp = tpr * n_pos
    return tp * (1.0 / precision - 1.0) / n_neg


# Validation class balance used to back out false-positive rates.
PAPER_VALIDATION_COUNTS = (5492, 5558)


def end_to_end_spec(seed: int = 0) -> StochasticModelSpec:
    """High-recall model that under-estimates request time linearly in n'."""
    t_p = 16
    return StochasticModelSpec(
        tpr=0.99,
        fpr=fpr_for_precision(0.99, 0.98, *PAPER_VALIDATION_COUNTS),
        rt_bias=tuple(-0.06 * n for n in range(1, t_p + 1)),
        rt_std=(0.35,) * t_p,
        seed=seed,
    )


def two_stage_spec(seed: int = 0) -> StochasticModelSpec:
    """Low-recall model, over-estimating near requests and under-estimating far ones."""
    bias = (1.0, 0.8, 0.5, 0.2, 0.0, -0.1, -0.1, -0.2, -0.2, -0.3, -0.4,
            -0.8, -1.1, -1.4, -1.7, -2.0)
    std = (0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8,
           2.0, 2.1, 2.2, 2.3, 2.4)
    return StochasticModelSpec(
        tpr=0.58,
        fpr=fpr_for_precision(0.58, 0.80, *PAPER_VALIDATION_COUNTS),
        rt_bias=bias,
        rt_std=std,
        seed=seed,
    )


PRESETS = {"end_to_end": end_to_end_spec, "two_stage": two_stage_spec}


def predict_oracle(dp: DataPoint) -> Prediction:
    return Prediction(dp.y_type, float(dp.y_rt))


def predict_majority_vote(per_frame_labels: Sequence[int]) -> int:
    n = len(per_frame_labels)
    if n < 1 or n % 2 == 0:
        raise ValueError(f"majority vote needs an odd, nonzero number of labels, got {n}")
    ones = 0
    for v in per_frame_labels:
        if v not in (0, 1):
            raise ValueError(f"labels must be 0 or 1, got {v!r}")
        ones += v
    return 1 if 2 * ones > n else 0


def noisy_frame_labels(y: int, accuracy: float, t_o: int, rng: np.random.Generator) -> list[int]:
    correct = rng.random(t_o) < accuracy
    return [y if c else 1 - y for c in correct]


def predict_stochastic(dp: DataPoint, spec: StochasticModelSpec) -> Prediction:
    n = dp.y_rt
    if not 1 <= n <= spec.t_p:
        raise ConfigError(f"data point u={dp.u} has n'={n}, outside the model's table 1..{spec.t_p}")
    rng = np.random.default_rng([spec.seed & 0xFFFFFFFFFFFFFFFF, dp.u])
    # draw order is part of the determinism contract: type first, then time
    if spec.frame_accuracy is not None:
        acc = spec.frame_accuracy[dp.y_type]
        y_type_hat = predict_majority_vote(noisy_frame_labels(dp.y_type, acc, spec.t_o, rng))
    else:
        p_urll = spec.tpr if dp.y_type == URLL else spec.fpr
        y_type_hat = URLL if rng.random() < p_urll else EMBB
    g = rng.standard_normal()
    y_rt_hat = max(0.0, n + spec.rt_bias[n - 1] + spec.rt_std[n - 1] * g)
    return Prediction(y_type_hat, float(y_rt_hat))


@dataclass
class PredictionTrace:
    """One prediction per data point, keyed by ``u`` in insertion order."""

    records: dict[int, Prediction] = field(default_factory=dict)

    def add(self, u: int, pred: Prediction) -> None:
        if u in self.records:
            raise TraceFormatError(f"duplicate prediction for u={u}")
        self.records[u] = pred

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records.items())


def predict_all(points: Iterable[DataPoint], model: str = "oracle",
                spec: StochasticModelSpec | None = None) -> PredictionTrace:
    trace = PredictionTrace()
    if model == "oracle":
        for dp in points:
            trace.add(dp.u, predict_oracle(dp))
    elif model == "stochastic":
        if spec is None:
            raise ConfigError("stochastic model needs a spec")
        for dp in points:
            trace.add(dp.u, predict_stochastic(dp, spec))
    else:
        raise ConfigError(f"unknown model {model!r}")
    return trace


def write_trace(trace: PredictionTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for u, p in trace:
            w.writerow([u, p.y_type_hat, repr(p.y_rt_hat)])


def load_trace(path) -> PredictionTrace:
    path = Path(path)
    trace = PredictionTrace()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return trace
        if tuple(h.strip() for h in header) != TRACE_COLUMNS:
            raise TraceFormatError(f"expected header {','.join(TRACE_COLUMNS)}", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise TraceFormatError(f"expected 3 fields, got {len(row)}", path, lineno)
            try:
                u = int(row[0])
                pred = Prediction(int(row[1]), float(row[2]))
            except ValueError as e:
                raise TraceFormatError(str(e), path, lineno) from e
            if u in trace.records:
                raise TraceFormatError(f"duplicate prediction for u={u}", path, lineno)
            trace.records[u] = pred
    return trace


def apply_trace(trace: PredictionTrace, dataset: Iterable[DataPoint]
                ) -> tuple[list[tuple[DataPoint, Prediction]], list[int]]:
    """Pair covered points with their prediction; also return uncovered ids.

    Raises if the trace names a data point that is not in ``dataset``.
    """
    dataset = list(dataset)
    known = {dp.u for dp in dataset}
    stray = [u for u in trace.records if u not in known]
    if stray:
        raise TraceFormatError(f"trace refers to unknown data points: {stray[:10]}")
    pairs, uncovered = [], []
    for dp in dataset:
        pred = trace.records.get(dp.u)
        if pred is None:
            uncovered.append(dp.u)
        else:
            pairs.append((dp, pred))
    return pairs, uncovered


def require_complete(trace: PredictionTrace, dataset: Iterable[DataPoint]) -> list[tuple[DataPoint, Prediction]]:
    pairs, uncovered = apply_trace(trace, dataset)
    if uncovered:
        raise IncompleteTraceError(uncovered)
    return pairs
