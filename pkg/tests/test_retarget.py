"""Retargeting: nearest-posture lookup against an exhaustive scan,
calibration replay identity, stream ordering rules, and lookup latency.
"""

import io
import json
import time

import numpy as np
import pytest

from engrasp.errors import (
    CalibrationError,
    ConfigError,
    InvalidInput,
    InvalidPulse,
    StreamError,
)
from engrasp.fixtures import calibration_samples, fixture_hand, stream_frames
from engrasp.hand.model import CHANNEL_ORDER
from engrasp.retarget.calibration import (
    CalibrationTable,
    load_calibration,
    record_calibration,
    save_calibration,
)
from engrasp.retarget.mapping import (
    ControlVector,
    HumanHandFrame,
    nearest_posture,
    retarget_frame,
)
from engrasp.retarget.stream import (
    StreamProcessor,
    frame_from_record,
    frame_to_record,
    process_stream,
    read_frames,
    result_to_record,
)


def make_frame(ts=1, flex=0.0, yaw=0.0, roll=0.0):
    v = np.full(3, flex)
    return HumanHandFrame(timestamp=ts, thumb=v, index=v, middle=v,
                          ring=v, pinky=v, thumb_yaw=yaw, thumb_roll=roll)


def exhaustive_nearest(table, theta):
    theta = np.asarray(theta, dtype=np.float64)
    best_k, best_d = 0, np.inf
    for k in range(len(table)):
        d = float(np.sum((table.postures[k] - theta) ** 2))
        if d < best_d:  # strict: ties keep the smallest index
            best_k, best_d = k, d
    return best_k, int(table.pulses[best_k])


@pytest.fixture(scope="module")
def tables():
    return record_calibration(calibration_samples())


class TestNearestPosture:
    def test_matches_exhaustive_scan(self, tables):
        rng = np.random.default_rng(51)
        for _ in range(300):
            channel = CHANNEL_ORDER[rng.integers(0, 7)]
            table = tables[channel]
            dim = table.postures.shape[1]
            theta = rng.uniform(-0.5, 2.5, size=dim)
            got = nearest_posture(table, theta)
            want = exhaustive_nearest(table, theta)
            assert got == want

    def test_random_tables_against_scan(self):
        rng = np.random.default_rng(52)
        for _ in range(50):
            k = int(rng.integers(2, 40))
            pulses = np.sort(rng.choice(5000, size=k, replace=False))
            postures = rng.normal(size=(k, 3))
            table = CalibrationTable("index_flex", pulses, postures)
            theta = rng.normal(size=3)
            assert nearest_posture(table, theta) == exhaustive_nearest(
                table, theta)

    def test_tie_breaks_to_smallest_index(self):
        # two postures equidistant from the probe
        table = CalibrationTable(
            "index_flex", [10, 20],
            np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))
        k, pulse = nearest_posture(table, [0.5, 0.0, 0.0])
        assert (k, pulse) == (0, 10)

    def test_exact_hit(self, tables):
        table = tables["index_flex"]
        k, pulse = nearest_posture(table, table.postures[4])
        assert k == 4
        assert pulse == int(table.pulses[4])

    def test_dimension_mismatch(self, tables):
        with pytest.raises(InvalidInput):
            nearest_posture(tables["index_flex"], [0.1])
        with pytest.raises(InvalidInput):
            nearest_posture(tables["thumb_yaw"], [0.1, 0.2, 0.3])

    def test_lookup_latency_p99_under_1ms(self):
        # K=1000 postures, 3 dims: worst-case flexion table size
        rng = np.random.default_rng(53)
        pulses = np.arange(1000, dtype=np.int64)
        postures = rng.normal(size=(1000, 3))
        table = CalibrationTable("index_flex", pulses, postures)
        probes = rng.normal(size=(500, 3))
        nearest_posture(table, probes[0])  # warm-up
        times = []
        for theta in probes:
            t0 = time.perf_counter()
            nearest_posture(table, theta)
            times.append(time.perf_counter() - t0)
        p99 = float(np.percentile(times, 99))
        assert p99 <= 1e-3, f"p99 lookup {p99 * 1e3:.3f} ms"


class TestRetargetFrame:
    def test_replay_identity(self, tables):
        # feeding back each calibration frame returns its own pulse on
        # every channel
        for pulse, frame in calibration_samples():
            u = retarget_frame(tables, frame)
            assert u.u == (pulse,) * 7

    def test_channel_order(self, tables):
        u = retarget_frame(tables, make_frame(flex=0.0))
        assert isinstance(u, ControlVector)
        assert len(u.u) == 7
        assert u.as_list() == list(u.u)

    def test_missing_table_raises(self, tables):
        partial = {k: v for k, v in tables.items() if k != "ring_flex"}
        with pytest.raises(ConfigError):
            retarget_frame(partial, make_frame())

    def test_validate_against_model(self, tables):
        hand = fixture_hand()
        u = retarget_frame(tables, make_frame(flex=0.9))
        assert u.validate_against(hand) is u
        bad = ControlVector((0, 0, 0, 0, 0, 0, 99999))
        with pytest.raises(InvalidPulse):
            bad.validate_against(hand)


class TestCalibration:
    def test_tables_cover_all_channels(self, tables):
        assert set(tables) == set(CHANNEL_ORDER)

    def test_pulses_strictly_increasing(self, tables):
        for table in tables.values():
            assert np.all(np.diff(table.pulses) > 0)

    def test_duplicate_pulses_averaged(self):
        samples = [
            (100, make_frame(ts=1, flex=0.2)),
            (100, make_frame(ts=2, flex=0.4)),
            (200, make_frame(ts=3, flex=0.8)),
        ]
        tables = record_calibration(samples)
        table = tables["index_flex"]
        assert list(table.pulses) == [100, 200]
        assert np.allclose(table.postures[0], [0.3, 0.3, 0.3], atol=1e-15)

    def test_empty_samples_rejected(self):
        with pytest.raises(CalibrationError):
            record_calibration([])

    def test_unsorted_input_sorted(self):
        samples = [
            (300, make_frame(ts=1, flex=0.9)),
            (100, make_frame(ts=2, flex=0.1)),
        ]
        table = record_calibration(samples)["index_flex"]
        assert list(table.pulses) == [100, 300]

    def test_table_validation(self):
        with pytest.raises(CalibrationError):
            CalibrationTable("index_flex", [], np.zeros((0, 3)))
        with pytest.raises(CalibrationError):
            CalibrationTable("index_flex", [5, 5], np.zeros((2, 3)))
        with pytest.raises(CalibrationError):
            CalibrationTable("index_flex", [1, 2], np.zeros((2, 1)))
        with pytest.raises(InvalidInput):
            CalibrationTable("wrist", [1], np.zeros((1, 3)))

    def test_save_load_round_trip(self, tables, tmp_path):
        path = tmp_path / "cal.yaml"
        save_calibration(tables, path)
        back = load_calibration(path)
        assert set(back) == set(tables)
        for name in tables:
            assert np.array_equal(back[name].pulses, tables[name].pulses)
            assert np.array_equal(back[name].postures, tables[name].postures)

    def test_save_is_deterministic(self, tables, tmp_path):
        a, b = tmp_path / "a.yaml", tmp_path / "b.yaml"
        save_calibration(tables, a)
        save_calibration(tables, b)
        assert a.read_bytes() == b.read_bytes()

    def test_load_rejects_bad_schema(self, tables, tmp_path):
        path = tmp_path / "cal.yaml"
        save_calibration(tables, path)
        text = path.read_text().replace("engrasp-calibration/1", "other/1")
        path.write_text(text)
        with pytest.raises(CalibrationError):
            load_calibration(path)


class TestStream:
    def test_out_of_order_frames_dropped(self, tables):
        frames = [make_frame(ts=10), make_frame(ts=5), make_frame(ts=10),
                  make_frame(ts=11)]
        proc = StreamProcessor(tables)
        results = [r for f in frames if (r := proc.process(f)) is not None]
        assert [r.timestamp for r in results] == [10, 11]
        assert proc.dropped == 2

    def test_unchanged_flag(self, tables):
        frames = [make_frame(ts=1, flex=0.0), make_frame(ts=2, flex=0.001),
                  make_frame(ts=3, flex=0.9)]
        results = list(process_stream(tables, frames))
        assert [r.unchanged for r in results] == [False, True, False]

    def test_pulse_values_track_input(self, tables):
        results = list(process_stream(tables, stream_frames(30)))
        assert len(results) == 30
        first, last = results[0].u.u, results[-1].u.u
        assert first == (0,) * 7
        assert last == (1200,) * 7

    def test_record_round_trip(self):
        frame = make_frame(ts=123, flex=0.25, yaw=0.1, roll=-0.05)
        back = frame_from_record(frame_to_record(frame))
        assert back.timestamp == frame.timestamp
        assert np.array_equal(back.index, frame.index)
        assert back.thumb_yaw == frame.thumb_yaw
        assert back.thumb_roll == frame.thumb_roll

    def test_read_frames_reports_line_numbers(self):
        good = json.dumps(frame_to_record(make_frame(ts=1)))
        stream = io.StringIO(good + "\n{broken\n")
        with pytest.raises(StreamError) as info:
            list(read_frames(stream))
        assert "line 2" in str(info.value)

    def test_read_frames_rejects_missing_fields(self):
        stream = io.StringIO('{"t": 1, "thumb": [0, 0, 0]}\n')
        with pytest.raises(StreamError):
            list(read_frames(stream))

    def test_result_record_shape(self, tables):
        result = next(process_stream(tables, [make_frame(ts=7)]))
        record = result_to_record(result)
        assert record == {"t": 7, "u": list(result.u.u), "unchanged": False}
