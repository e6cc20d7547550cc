"""Abstract raw sequences and the sliding-window dataset built from them.

A raw sequence stands for one trajectory of a person walking up to a device.
The device type fixes the service (0 = eMBB, 1 = URLL) and the request fires
when the sequence ends. Sliding a ``t_o``-frame window one frame at a time
over a sequence of ``L`` frames yields ``L - t_o`` labeled data points whose
request times count down from ``L - t_o`` to 1.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ConfigError, EmptySequenceError, TraceFormatError
from .timing import TimingConfig, round_half_away

log = logging.getLogger(__name__)

EMBB = 0
URLL = 1

DATASET_COLUMNS = ("u", "raw_id", "window_end_frame", "y_type", "y_rt", "x", "l", "split")

# Stream tags keep per-purpose random streams disjoint under one seed.
_GEN_STREAM = 0
_JITTER_STREAM = 1
_SPLIT_STREAM = 2


@dataclass(frozen=True)
class ScenarioConfig:
    # 4333 sequences x 8.5 mean points each gives ~36.8k data points, i.e. a
    # 30% validation set of ~11k.
    num_raw_sequences: int = 4333
    length_frames_range: tuple[int, int] = (6, 21)
    t_o: int = 5
    urll_probability: float = 0.5
    packet_length_slots_range: tuple[int, int] = (1, 8)
    train_fraction: float = 0.7
    jitter_within_frame: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "length_frames_range", tuple(int(v) for v in self.length_frames_range))
        object.__setattr__(self, "packet_length_slots_range", tuple(int(v) for v in self.packet_length_slots_range))
        l_min, l_max = self.length_frames_range
        p_min, p_max = self.packet_length_slots_range
        if self.num_raw_sequences < 1:
            raise ValueError("num_raw_sequences must be >= 1")
        if self.t_o < 1:
            raise ValueError("t_o must be >= 1")
        if l_min > l_max:
            raise ValueError(f"empty length range [{l_min}, {l_max}]")
        if l_min < self.t_o + 1:
            raise ValueError(f"minimum length {l_min} must be >= t_o + 1 = {self.t_o + 1}")
        if p_min > p_max:
            raise ValueError(f"empty packet length range [{p_min}, {p_max}]")
        if p_min < 1:
            raise ValueError("packets must be at least one slot long")
        if not 0.0 <= self.urll_probability <= 1.0:
            raise ValueError("urll_probability must lie in [0, 1]")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")

    @property
    def t_p(self) -> int:
        """Largest number of future frames a data point can carry."""
        return self.length_frames_range[1] - self.t_o

    @property
    def mean_packet_length(self) -> float:
        lo, hi = self.packet_length_slots_range
        return (lo + hi) / 2.0

    @classmethod
    def from_dict(cls, d: dict | None) -> "ScenarioConfig":
        d = dict(d or {})
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"scenario: {e}") from e


@dataclass(frozen=True)
class RawSequence:
    id: int
    length_frames: int
    service_type: int
    packet_length_slots: int


@dataclass(frozen=True)
class DataPoint:
    u: int
    raw_id: int
    window_end_frame: int
    y_type: int
    y_rt: int
    x: int
    l: int
    split: str = field(default="", compare=False)

    @property
    def packet_end(self) -> int:
        return self.x + self.l - 1


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *key])


def generate(config: ScenarioConfig) -> list[RawSequence]:
    """Draw the raw sequences; sequence ``i`` uses a stream keyed by (seed, i)."""
    l_min, l_max = config.length_frames_range
    p_min, p_max = config.packet_length_slots_range
    out = []
    for i in range(1, config.num_raw_sequences + 1):
        rng = _stream(config.seed, _GEN_STREAM, i)
        length = int(rng.integers(l_min, l_max + 1))
        stype = URLL if rng.random() < config.urll_probability else EMBB
        plen = int(rng.integers(p_min, p_max + 1))
        out.append(RawSequence(i, length, stype, plen))
    return out


def slice_sequence(raw: RawSequence, t_o: int, cfg: TimingConfig, start_u: int = 1,
                   jitter_seed: int | None = None) -> list[DataPoint]:
    """Slide a ``t_o``-frame window over ``raw`` one frame at a time.

    The packet of a point with ``n`` future frames starts at slot
    ``n * fsr + 1`` counted from the end of its window, i.e. in the first slot
    after the last future frame. With ``jitter_seed`` set, a uniform offset in
    ``[0, fsr - 1]`` is added to that start.
    """
    L = raw.length_frames
    if L <= t_o:
        raise EmptySequenceError(f"raw sequence {raw.id} has {L} frames; need more than t_o = {t_o}")
    points = []
    for k, end in enumerate(range(t_o, L)):
        n_future = L - end
        x = n_future * cfg.fsr + 1
        if jitter_seed is not None:
            x += int(_stream(jitter_seed, _JITTER_STREAM, raw.id, end).integers(0, cfg.fsr))
        points.append(DataPoint(
            u=start_u + k,
            raw_id=raw.id,
            window_end_frame=end,
            y_type=raw.service_type,
            y_rt=n_future,
            x=x,
            l=raw.packet_length_slots,
        ))
    return points


def build_points(raws: Iterable[RawSequence], t_o: int, cfg: TimingConfig,
                 jitter_seed: int | None = None) -> list[DataPoint]:
    """Slice every raw sequence, numbering data points 1..U in sequence order."""
    points: list[DataPoint] = []
    for raw in raws:
        points.extend(slice_sequence(raw, t_o, cfg, start_u=len(points) + 1, jitter_seed=jitter_seed))
    return points


def split(points: list[DataPoint], train_fraction: float, seed: int) -> tuple[list[DataPoint], list[DataPoint]]:
    """Shuffle-split into (train, validation), each returned in ascending ``u``."""
    if not points:
        raise ValueError("cannot split an empty dataset")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n_train = round_half_away(train_fraction * len(points))
    order = _stream(seed, _SPLIT_STREAM).permutation(len(points))
    is_train = np.zeros(len(points), dtype=bool)
    is_train[order[:n_train]] = True
    train = [_with_split(p, "train") for p, t in zip(points, is_train) if t]
    val = [_with_split(p, "val") for p, t in zip(points, is_train) if not t]
    train.sort(key=lambda p: p.u)
    val.sort(key=lambda p: p.u)
    return train, val


def _with_split(p: DataPoint, name: str) -> DataPoint:
    return DataPoint(p.u, p.raw_id, p.window_end_frame, p.y_type, p.y_rt, p.x, p.l, name)


def build_dataset(config: ScenarioConfig, timing: TimingConfig) -> list[DataPoint]:
    """Generate, slice and split; every returned point carries its split tag."""
    raws = generate(config)
    jitter = config.seed if config.jitter_within_frame else None
    points = build_points(raws, config.t_o, timing, jitter_seed=jitter)
    train, val = split(points, config.train_fraction, config.seed)
    log.info("dataset: %d points (%d train / %d val) from %d raw sequences",
             len(points), len(train), len(val), len(raws))
    return sorted(train + val, key=lambda p: p.u)


def validation(points: Iterable[DataPoint]) -> list[DataPoint]:
    return [p for p in points if p.split == "val"]


def write_dataset(points: Iterable[DataPoint], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DATASET_COLUMNS)
        for p in points:
            w.writerow([p.u, p.raw_id, p.window_end_frame, p.y_type, p.y_rt, p.x, p.l, p.split])


def read_dataset(path) -> list[DataPoint]:
    path = Path(path)
    points = []
    seen = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise TraceFormatError("empty dataset file", path, 1)
        header = [h.strip() for h in header]
        required = ("u", "raw_id", "y_type", "y_rt", "x", "l")
        missing = [c for c in required if c not in header]
        if missing:
            raise TraceFormatError(f"missing columns {missing}", path, 1)
        idx = {c: header.index(c) for c in header}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise TraceFormatError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
            try:
                get = lambda c: int(row[idx[c]])  # noqa: E731
                p = DataPoint(
                    u=get("u"),
                    raw_id=get("raw_id"),
                    window_end_frame=get("window_end_frame") if "window_end_frame" in idx else 0,
                    y_type=get("y_type"),
                    y_rt=get("y_rt"),
                    x=get("x"),
                    l=get("l"),
                    # files without a split column are evaluated whole
                    split=row[idx["split"]].strip() if "split" in idx else "val",
                )
            except ValueError as e:
                raise TraceFormatError(f"bad field: {e}", path, lineno) from e
            if p.y_type not in (EMBB, URLL) or p.y_rt < 1 or p.x < 1 or p.l < 1:
                raise TraceFormatError("field out of range", path, lineno)
            if p.u in seen:
                raise TraceFormatError(f"duplicate data point u={p.u}", path, lineno)
            seen.add(p.u)
            points.append(p)
    return points
