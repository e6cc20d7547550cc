"""YAML run configuration.

Top-level sections, all optional::

    timing:
      tau_v_seconds: 0.0333333   # frame duration; slot duration is derived
      fsr: 33                    # slots per frame
    scenario:                    # see ScenarioConfig
      num_raw_sequences: 4333
      length_frames_range: [6, 21]
      t_o: 5
      urll_probability: 0.5
      packet_length_slots_range: [1, 8]
      train_fraction: 0.7
      jitter_within_frame: false
      seed: 0
    predictor:
      model: stochastic          # oracle | stochastic
      preset: end_to_end         # optional base: end_to_end | two_stage
      tpr: 0.99
      fpr: 0.02
      rt_bias: [...]             # frames, one per n' = 1..T_p (or a scalar)
      rt_std: [...]
      frame_accuracy: null       # [p_embb, p_urll] -> majority-vote type decision
      seed: 0
    metrics:
      rho: null                  # horizon in slots; derived when null
      t_g_frames: 1.0
    sweep:
      t_g_frames_grid: {start: 0.1, stop: 10.0, step: 0.1}   # or an explicit list
      policy: null               # proactive | orthogonal | greedy: adds slot-exact columns
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .predictor import StochasticModelSpec
from .scenario import ScenarioConfig
from .scheduler import Policy
from .timing import TimingConfig


def frange_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive decimal grid; values are rounded so 0.1-steps print cleanly."""
    if step <= 0:
        raise ConfigError("grid step must be positive")
    n = int(round((stop - start) / step))
    if n < 0 or abs(start + n * step - stop) > 1e-9 * max(1.0, abs(stop)):
        raise ConfigError(f"grid stop {stop} is not reachable from {start} in steps of {step}")
    return [round(start + k * step, 10) for k in range(n + 1)]


DEFAULT_GRID = tuple(frange_grid(0.1, 10.0, 0.1))


def validate_grid(grid) -> list[float]:
    grid = [float(v) for v in grid]
    if not grid:
        raise ConfigError("guard grid is empty")
    if any(v < 0 for v in grid):
        raise ConfigError("guard grid values must be >= 0")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("guard grid must be strictly increasing")
    return grid


@dataclass
class PredictorConfig:
    model: str = "oracle"
    spec: StochasticModelSpec | None = None


@dataclass
class Config:
    timing: TimingConfig = field(default_factory=TimingConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    rho: int | None = None
    t_g_frames: float = 0.0
    grid: list[float] = field(default_factory=lambda: list(DEFAULT_GRID))
    sweep_policy: Policy | None = None


def predictor_from_dict(d: dict) -> PredictorConfig:
    d = dict(d)
    model = d.pop("model", "stochastic" if d else "oracle")
    if model == "oracle":
        if d:
            raise ConfigError(f"oracle predictor takes no parameters, got {sorted(d)}")
        return PredictorConfig("oracle")
    if model == "stochastic":
        return PredictorConfig("stochastic", StochasticModelSpec.from_dict(d))
    raise ConfigError(f"unknown predictor model {model!r}")


def config_from_dict(d: dict | None) -> Config:
    d = dict(d or {})
    unknown = set(d) - {"timing", "scenario", "predictor", "metrics", "sweep"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    cfg = Config()
    try:
        cfg.timing = TimingConfig.from_dict(d.get("timing"))
    except ValueError as e:
        raise ConfigError(f"timing: {e}") from e
    cfg.scenario = ScenarioConfig.from_dict(d.get("scenario"))
    if d.get("predictor"):
        cfg.predictor = predictor_from_dict(d["predictor"])

    metrics = dict(d.get("metrics") or {})
    rho = metrics.pop("rho", None)
    cfg.rho = None if rho is None else int(rho)
    cfg.t_g_frames = float(metrics.pop("t_g_frames", 0.0))
    if metrics:
        raise ConfigError(f"unknown metrics keys: {sorted(metrics)}")

    sweep = dict(d.get("sweep") or {})
    grid = sweep.pop("t_g_frames_grid", None)
    if isinstance(grid, dict):
        grid = frange_grid(float(grid["start"]), float(grid["stop"]), float(grid["step"]))
    if grid is not None:
        cfg.grid = validate_grid(grid)
    policy = sweep.pop("policy", None)
    if policy is not None:
        cfg.sweep_policy = Policy(policy)
    if sweep:
        raise ConfigError(f"unknown sweep keys: {sorted(sweep)}")
    return cfg


def load_config(path) -> Config:
    path = Path(path)
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise OSError(f"cannot read config {path}: {e.strerror}") from e
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(data)
