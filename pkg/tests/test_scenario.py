from collections import defaultdict

import pytest

from coexist.errors import ConfigError, EmptySequenceError, TraceFormatError
from coexist.scenario import (
    EMBB,
    URLL,
    DataPoint,
    RawSequence,
    ScenarioConfig,
    build_dataset,
    build_points,
    generate,
    read_dataset,
    slice_sequence,
    split,
    validation,
    write_dataset,
)
from coexist.timing import TimingConfig, frame_start_slot

FSR33 = TimingConfig()


def test_degenerate_config_forces_values():
    cfg = ScenarioConfig(num_raw_sequences=1, length_frames_range=(12, 12), urll_probability=1.0, seed=7)
    (raw,) = generate(cfg)
    assert raw.length_frames == 12 and raw.service_type == URLL
    assert cfg.t_p == 7


def test_generate_deterministic():
    cfg = ScenarioConfig(num_raw_sequences=50, seed=7)
    assert generate(cfg) == generate(cfg)
    assert generate(cfg) != generate(ScenarioConfig(num_raw_sequences=50, seed=8))


def test_generate_prefix_stable():
    # per-sequence streams: adding sequences never changes earlier ones
    a = generate(ScenarioConfig(num_raw_sequences=30, seed=3))
    b = generate(ScenarioConfig(num_raw_sequences=40, seed=3))
    assert b[:30] == a


def test_generate_ranges():
    cfg = ScenarioConfig(num_raw_sequences=500, length_frames_range=(6, 9), packet_length_slots_range=(2, 4))
    raws = generate(cfg)
    assert {r.length_frames for r in raws} == {6, 7, 8, 9}
    assert {r.packet_length_slots for r in raws} == {2, 3, 4}
    assert {r.service_type for r in raws} == {EMBB, URLL}


@pytest.mark.parametrize("kwargs", [
    dict(length_frames_range=(10, 8)),
    dict(packet_length_slots_range=(5, 4)),
    dict(packet_length_slots_range=(0, 4)),
    dict(length_frames_range=(5, 10)),
    dict(t_o=0),
    dict(urll_probability=1.5),
    dict(num_raw_sequences=0),
    dict(train_fraction=1.0),
])
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        ScenarioConfig(**kwargs)


def test_from_dict_rejects_unknown():
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"num_sequences": 3})
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({"length_frames_range": [9, 3]})


def test_slice_twelve_frames():
    pts = slice_sequence(RawSequence(1, 12, URLL, 3), 5, FSR33)
    assert len(pts) == 7
    assert [p.y_rt for p in pts] == [7, 6, 5, 4, 3, 2, 1]
    assert [p.window_end_frame for p in pts] == list(range(5, 12))
    # packet starts with the frame after the last future frame
    assert pts[0].x == frame_start_slot(7 + 1, FSR33) == 232
    assert all(p.y_type == URLL and p.l == 3 for p in pts)


def test_slice_minimum_length():
    (p,) = slice_sequence(RawSequence(4, 6, EMBB, 1), 5, FSR33)
    assert (p.y_rt, p.x, p.y_type) == (1, 34, EMBB)


def test_slice_too_short():
    with pytest.raises(EmptySequenceError):
        slice_sequence(RawSequence(1, 5, URLL, 1), 5, FSR33)


def test_jitter_stays_within_frame():
    raws = generate(ScenarioConfig(num_raw_sequences=40, seed=2))
    plain = build_points(raws, 5, FSR33)
    jit = build_points(raws, 5, FSR33, jitter_seed=2)
    assert jit == build_points(raws, 5, FSR33, jitter_seed=2)
    offsets = [j.x - p.x for p, j in zip(plain, jit)]
    assert all(0 <= o < FSR33.fsr for o in offsets)
    assert len(set(offsets)) > 1


def test_split_sizes():
    pts = [DataPoint(u, 1, 5, 1, 1, 34, 1) for u in range(1, 11)]
    train, val = split(pts, 0.7, seed=0)
    assert (len(train), len(val)) == (7, 3)
    assert {p.u for p in train}.isdisjoint(p.u for p in val)
    assert {p.u for p in train} | {p.u for p in val} == set(range(1, 11))
    assert split(pts, 0.7, seed=0) == (train, val)


def test_split_empty():
    with pytest.raises(ValueError):
        split([], 0.7, 0)


def test_default_dataset_size(default_dataset):
    # paper reports roughly 36 thousand data points
    assert abs(len(default_dataset) - 36_000) / 36_000 < 0.05
    us = [p.u for p in default_dataset]
    assert us == list(range(1, len(us) + 1))


def test_default_validation_balance(default_dataset, default_val):
    assert len(default_val) == len(default_dataset) - round(0.7 * len(default_dataset))
    n_urll = sum(p.y_type == URLL for p in default_val)
    n_embb = len(default_val) - n_urll
    assert abs(n_urll - 5492) / 5492 < 0.05
    assert abs(n_embb - 5558) / 5558 < 0.05


def test_slicing_invariants(default_dataset, timing):
    by_raw = defaultdict(list)
    for p in default_dataset:
        by_raw[p.raw_id].append(p)
        assert p.x % timing.fsr == 1
        assert p.x == p.y_rt * timing.fsr + 1
    for pts in by_raw.values():
        assert sorted(p.y_rt for p in pts) == list(range(1, len(pts) + 1))
        assert len({p.y_type for p in pts}) == 1
    assert max(p.y_rt for p in default_dataset) == 16


def test_build_dataset_deterministic(small_config, timing, small_dataset):
    again = build_dataset(small_config, timing)
    assert again == small_dataset
    assert [p.split for p in again] == [p.split for p in small_dataset]


def test_dataset_round_trip(tmp_path, small_dataset):
    path = tmp_path / "ds.csv"
    write_dataset(small_dataset, path)
    back = read_dataset(path)
    assert back == small_dataset
    assert [p.split for p in back] == [p.split for p in small_dataset]
    assert validation(back) == validation(small_dataset)


def test_read_dataset_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("u,raw_id,y_type,y_rt,x,l\n1,1,1,2,67,3\n2,1,1,x,34,3\n")
    with pytest.raises(TraceFormatError, match=r"bad.csv:3"):
        read_dataset(bad)
    dup = tmp_path / "dup.csv"
    dup.write_text("u,raw_id,y_type,y_rt,x,l\n1,1,1,2,67,3\n1,1,1,1,34,3\n")
    with pytest.raises(TraceFormatError, match="duplicate"):
        read_dataset(dup)
    minimal = tmp_path / "min.csv"
    minimal.write_text("u,raw_id,y_type,y_rt,x,l\n1,1,1,2,67,3\n")
    (p,) = read_dataset(minimal)
    assert p.split == "val"
