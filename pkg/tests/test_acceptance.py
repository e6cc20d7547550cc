"""Exit criteria. Each test logs one PASS/FAIL line to the terminal summary."""

import math
import time
from itertools import product

import numpy as np
import pytest

from coexist.cli import main
from coexist.config import DEFAULT_GRID
from coexist.metrics import (
    MetricsConfig,
    evaluate,
    events,
    grouped_rt_stats,
    reliability_point,
    timeline_metrics,
    utilization_point,
)
from coexist.predictor import (
    Prediction,
    StochasticModelSpec,
    apply_trace,
    end_to_end_spec,
    fpr_for_precision,
    predict_all,
    predict_majority_vote,
    two_stage_spec,
)
from coexist.scenario import URLL, DataPoint, ScenarioConfig, build_dataset, validation
from coexist.scheduler import GuardConfig, build_timeline, plan_guard
from coexist.sweep import run_sweep
from coexist.timing import TimingConfig


def _pairs(points, model, spec=None):
    return apply_trace(predict_all(points, model, spec), points)[0]


@pytest.fixture(scope="module")
def e2e_rows(default_val, timing):
    return run_sweep(_pairs(default_val, "stochastic", end_to_end_spec(seed=0)), timing, DEFAULT_GRID)


@pytest.fixture(scope="module")
def two_stage_rows(default_val, timing):
    return run_sweep(_pairs(default_val, "stochastic", two_stage_spec(seed=0)), timing, DEFAULT_GRID)


def test_1_oracle_perfection(acceptance_log):
    start = time.perf_counter()
    timing = TimingConfig()
    val = validation(build_dataset(ScenarioConfig(), timing))
    report = evaluate(_pairs(val, "oracle"), timing, GuardConfig.from_frames(0.0, timing))
    elapsed = time.perf_counter() - start
    ok = report.er_percent == 100.0 and report.ez_percent == 100.0 and elapsed < 10.0
    acceptance_log("1 oracle perfection", ok,
                   f"ER={report.er_percent} EZ={report.ez_percent} over {report.n_urll} URLL points in {elapsed:.2f}s")
    assert report.er_percent == 100.0
    assert report.ez_percent == 100.0
    assert elapsed < 10.0


def test_2_closed_form_equals_timeline(acceptance_log):
    timing = TimingConfig()
    rng = np.random.default_rng(12345)
    n = 20_000
    mismatches = 0
    for _ in range(n):
        y_rt = int(rng.integers(1, 17))
        jitter = int(rng.integers(0, 33)) if rng.random() < 0.3 else 0
        l = int(rng.integers(1, 9))
        dp = DataPoint(1, 1, 5, URLL, y_rt, y_rt * 33 + 1 + jitter, l)
        # predictions span over- and under-shoot, guards clamped at slot 1 and cut at rho
        pred = Prediction(int(rng.random() < 0.8), float(rng.uniform(0.0, 22.0)))
        guard = GuardConfig.from_frames(float(rng.choice(DEFAULT_GRID + (0.0,))), timing)
        rho = 16 * 33 + 32 + 2 * guard.t_g_slots + 8
        g = plan_guard(pred, guard, timing)
        f = events(dp, pred, g)
        tl = build_timeline(dp, g, "proactive", rho)
        z = utilization_point(f, dp, g.x_hat if g else None, MetricsConfig(rho, guard))
        if reliability_point(f) != tl.packet_success or z != 1.0 - tl.idle_slots / rho:
            mismatches += 1
    acceptance_log("2 closed form == slot timeline", mismatches == 0, f"{mismatches} mismatches in {n} triples")
    assert mismatches == 0


def test_3_baseline_extremes(acceptance_log, default_val, timing):
    urll = [p for p in default_val if p.y_type == URLL]
    rho = max(p.packet_end for p in default_val)
    r_g, z_g = timeline_metrics(build_timeline(p, None, "greedy", rho) for p in urll)
    r_o, z_o = timeline_metrics(build_timeline(p, None, "orthogonal", rho) for p in urll)
    mean_l = sum(p.l for p in urll) / len(urll)
    cfg_mean = ScenarioConfig().mean_packet_length
    z_cfg = 100.0 * cfg_mean / rho
    ok = (r_g == 0.0 and z_g == 100.0 and r_o == 100.0
          and math.isclose(z_o, 100.0 * mean_l / rho, rel_tol=1e-12) and abs(z_o - z_cfg) <= 0.5)
    acceptance_log("3 baseline extremes", ok,
                   f"greedy R={r_g} Z={z_g}; orthogonal R={r_o} Z={z_o:.4f} "
                   f"(100*E[l]/rho={z_cfg:.4f} with configured E[l]={cfg_mean}, rho={rho})")
    assert (r_g, z_g) == (0.0, 100.0)
    assert r_o == 100.0
    assert z_o == pytest.approx(100.0 * mean_l / rho, rel=1e-12)
    assert abs(z_o - z_cfg) <= 0.5


def test_4_monotone_frontier(acceptance_log, e2e_rows, two_stage_rows):
    results = {}
    for name, rows in (("end-to-end", e2e_rows), ("two-stage", two_stage_rows)):
        er = [r["er_percent"] for r in rows]
        results[name] = len(rows) == 100 and all(b >= a for a, b in zip(er, er[1:]))
    acceptance_log("4 monotone ER along grid", all(results.values()),
                   ", ".join(f"{k}: {'nondecreasing' if v else 'VIOLATED'}" for k, v in results.items()))
    assert all(results.values())


def test_5_calibrated_recall_regime(acceptance_log, default_val, timing):
    spec = StochasticModelSpec(
        tpr=0.99,
        fpr=fpr_for_precision(0.99, 0.98, 5492, 5558),
        rt_bias=(0.0,) * 16,
        rt_std=(0.3,) * 16,
        seed=0,
    )
    r = evaluate(_pairs(default_val, "stochastic", spec), timing, GuardConfig.from_frames(1.0, timing))
    ok = abs(r.er_percent - 99.0) <= 1.0 and abs(r.precision - 0.98) <= 0.01 and abs(r.recall - 0.99) <= 0.01
    acceptance_log("5 calibrated recall regime", ok,
                   f"ER={r.er_percent:.3f}% precision={r.precision:.4f} recall={r.recall:.4f} "
                   f"over {r.n_urll} URLL points")
    assert r.er_percent == pytest.approx(99.0, abs=1.0)
    assert r.precision == pytest.approx(0.98, abs=0.01)
    assert r.recall == pytest.approx(0.99, abs=0.01)


def test_6_frontier_shape(acceptance_log, e2e_rows, two_stage_rows):
    spec = end_to_end_spec()
    assert all(b < 0 for b in spec.rt_bias)
    assert all(b2 < b1 for b1, b2 in zip(spec.rt_bias, spec.rt_bias[1:]))
    ez = [r["ez_percent"] for r in e2e_rows]
    strictly_down = all(b < a for a, b in zip(ez, ez[1:]))
    e2e_sat = e2e_rows[-1]["er_percent"]
    ts_sat = two_stage_rows[-1]["er_percent"]
    ok = strictly_down and e2e_sat > 97.0 and abs(ts_sat - 58.0) <= 2.0
    acceptance_log("6 frontier shape", ok,
                   f"end-to-end EZ strictly decreasing={strictly_down} ({ez[0]:.2f}->{ez[-1]:.2f}), "
                   f"ER saturates at {e2e_sat:.2f}%; two-stage ER saturates at {ts_sat:.2f}%")
    assert strictly_down
    assert e2e_sat > 97.0
    assert ts_sat == pytest.approx(58.0, abs=2.0)


def test_7_majority_vote(acceptance_log):
    p, t_o = 0.8, 5
    exact = sum(
        math.prod(p if c else 1 - p for c in pattern)
        for pattern in product((0, 1), repeat=t_o)
        if 2 * sum(pattern) > t_o
    )
    rng = np.random.default_rng(7)
    trials = 100_000
    correct = rng.random((trials, t_o)) < p
    votes = [predict_majority_vote(row) for row in correct.astype(int).tolist()]
    empirical = sum(votes) / trials
    ok = abs(exact - 0.94208) < 1e-12 and abs(empirical - 0.94208) <= 0.01
    acceptance_log("7 majority-vote accuracy", ok, f"enumerated={exact:.5f} empirical={empirical:.5f} ({trials} trials)")
    assert exact == pytest.approx(0.94208, abs=1e-12)
    assert empirical == pytest.approx(0.94208, abs=0.01)


def test_8_grouped_statistics(acceptance_log, default_val):
    c = 6.3
    const = grouped_rt_stats((p.y_rt, c) for p in default_val)
    oracle_trace = predict_all(default_val, "oracle")
    oracle = grouped_rt_stats((p.y_rt, oracle_trace.records[p.u].y_rt_hat) for p in default_val)
    ok_const = all(g.mean == c and g.msd == 0.0 and g.std == 0.0 for g in const.values())
    ok_oracle = all(g.mean == float(n) and g.std == 0.0 for n, g in oracle.items())
    acceptance_log("8 grouped request-time stats", ok_const and ok_oracle,
                   f"{len(const)} groups; constant exact={ok_const}; oracle identity exact={ok_oracle}")
    assert ok_const and ok_oracle
    assert sorted(oracle) == list(range(1, 17))


def test_9_pipeline_determinism(acceptance_log, tmp_path):
    spec = tmp_path / "spec.yaml"
    spec.write_text("predictor:\n  preset: end_to_end\n  seed: 21\n")
    blobs = []
    for run in ("first", "second"):
        d = tmp_path / run
        d.mkdir()
        assert main(["generate", "--out", str(d / "ds.csv")]) == 0
        assert main(["predict", "--dataset", str(d / "ds.csv"), "--model", "stochastic",
                     "--spec", str(spec), "--out", str(d / "trace.csv")]) == 0
        assert main(["sweep", "--dataset", str(d / "ds.csv"), "--trace", str(d / "trace.csv"),
                     "--out", str(d / "sweep.csv")]) == 0
        blobs.append({f: (d / f).read_bytes() for f in ("ds.csv", "trace.csv", "sweep.csv")})
    same = blobs[0] == blobs[1]
    n_rows = blobs[0]["sweep.csv"].count(b"\n") - 1
    acceptance_log("9 pipeline determinism", same and n_rows == 100,
                   f"dataset/trace/sweep byte-identical={same}, sweep rows={n_rows}")
    assert same
    assert n_rows == 100
