"""Change-point extraction: detector examples against the offline
segmentation oracle, event boundaries, pooling, and invariances."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from caseboard.changepoint import (
    ChangePointArray,
    DetectorConfig,
    changepoints_for_data,
    detect_events,
    detect_series,
    pool_changepoints,
    sample_offsets,
)
from caseboard.errors import InvalidArgumentError
from caseboard.store import ClueData, DataKind, EventSequenceData, TimeSeriesData
from caseboard.windows import TimeWindow
from oracles import brute_pool, event_boundaries, offline_map_segmentation

STEP = 10
N = 200
WINDOW = TimeWindow(0, N * STEP)
STAMPS = np.arange(N, dtype=np.int64) * STEP


def series_with_steps(seed: int, steps, sigma: float = 0.5) -> tuple[TimeSeriesData, np.ndarray]:
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.normal(0.0, sigma, N)
    for at, delta in steps:
        x[at:] += delta
    return TimeSeriesData(STAMPS, x), x


def detected_indexes(series: TimeSeriesData) -> list[int]:
    return [int(p) // STEP for p in detect_series(series, WINDOW).points]


class TestDetectSeries:
    def test_constant_series_has_no_points(self):
        series = TimeSeriesData(STAMPS, np.full(N, 7.25))
        assert detect_series(series, WINDOW).points == ()

    def test_single_step_recovered_and_matches_offline_oracle(self):
        series, x = series_with_steps(0, [(50, 5.0)])
        got = detected_indexes(series)
        assert len(got) == 1 and 47 <= got[0] <= 53
        oracle = offline_map_segmentation(x)
        assert len(oracle) == 1
        assert abs(got[0] - oracle[0]) <= 3

    def test_two_steps_recovered_and_match_offline_oracle(self):
        series, x = series_with_steps(1, [(60, 4.0), (140, -4.0)])
        got = detected_indexes(series)
        assert len(got) == 2
        assert abs(got[0] - 60) <= 3 and abs(got[1] - 140) <= 3
        oracle = offline_map_segmentation(x)
        assert len(oracle) == 2
        assert abs(got[0] - oracle[0]) <= 3 and abs(got[1] - oracle[1]) <= 3

    def test_empty_series_rejected(self):
        series = TimeSeriesData(STAMPS, np.ones(N))
        with pytest.raises(InvalidArgumentError):
            detect_series(series, TimeWindow(5000, 5000))

    def test_shift_equivariance(self):
        series, x = series_with_steps(2, [(80, 6.0)])
        base = detect_series(series, WINDOW).points
        offset = 100 * STEP
        shifted = TimeSeriesData(STAMPS + offset, x)
        moved = detect_series(shifted, TimeWindow(offset, offset + N * STEP)).points
        assert tuple(p + offset for p in base) == moved

    def test_scale_invariance_of_locations(self):
        # The detector standardizes the window, so rescaling the values
        # moves no report.
        series, x = series_with_steps(5, [(70, 5.0)])
        scaled = TimeSeriesData(STAMPS, x * 37.5)
        assert detect_series(series, WINDOW).points == detect_series(scaled, WINDOW).points

    def test_window_start_never_reported(self):
        for seed in range(10):
            series, _ = series_with_steps(seed, [(3, 8.0)])
            assert WINDOW.start not in detect_series(series, WINDOW).points

    def test_min_gap_spacing(self):
        series, _ = series_with_steps(9, [(60, 5.0), (64, -5.0), (68, 5.0)])
        pts = detected_indexes(series)
        assert all(b - a >= DetectorConfig().min_gap for a, b in zip(pts, pts[1:]))


class TestDetectEvents:
    def test_single_interval_spanning_window(self):
        seq = EventSequenceData([(0, N * STEP, "v1")])
        assert detect_events(seq, WINDOW).points == ()

    def test_label_switch_reports_junction(self):
        seq = EventSequenceData([(0, 300, "v1"), (300, N * STEP, "v2")])
        assert detect_events(seq, WINDOW).points == (300,)

    def test_gap_reports_both_boundaries(self):
        seq = EventSequenceData([(0, 400, "v1"), (700, N * STEP, "v1")])
        assert detect_events(seq, WINDOW).points == (400, 700)

    def test_same_label_junction_is_silent(self):
        seq = EventSequenceData([(0, 500, "v1"), (500, N * STEP, "v1")])
        assert detect_events(seq, WINDOW).points == ()

    def test_partial_coverage_reports_edges(self):
        seq = EventSequenceData([(250, 900, "v1")])
        assert detect_events(seq, WINDOW).points == (250, 900)

    @given(st.data())
    def test_matches_boundary_oracle(self, data):
        n_iv = data.draw(st.integers(1, 4))
        bounds = sorted(
            data.draw(
                st.lists(
                    st.integers(0, N * STEP),
                    min_size=2 * n_iv,
                    max_size=2 * n_iv,
                    unique=True,
                )
            )
        )
        labels = data.draw(st.lists(st.sampled_from(["a", "b", "c"]), min_size=n_iv, max_size=n_iv))
        intervals = [
            (bounds[2 * i], bounds[2 * i + 1], labels[i]) for i in range(n_iv)
        ]
        seq = EventSequenceData(intervals)
        got = detect_events(seq, WINDOW).points
        assert list(got) == event_boundaries(intervals, WINDOW.start, WINDOW.end)


class TestPooling:
    def test_single_array_is_identity(self):
        arr = ChangePointArray((10, 50, 90))
        assert pool_changepoints([arr], 5).points == (10, 50, 90)

    def test_points_within_tolerance_merge_to_earliest(self):
        got = pool_changepoints([ChangePointArray((10,)), ChangePointArray((11,))], 2)
        assert got.points == (10,)

    def test_worked_example(self):
        got = pool_changepoints(
            [ChangePointArray((10, 50)), ChangePointArray((12, 90))], 1
        )
        assert got.points == (10, 12, 50, 90)

    def test_negative_tolerance_rejected(self):
        with pytest.raises(InvalidArgumentError):
            pool_changepoints([ChangePointArray((1,))], -1)

    @given(
        st.lists(
            st.lists(st.integers(0, 500), min_size=0, max_size=6).map(
                lambda pts: ChangePointArray(tuple(sorted(set(pts))))
            ),
            min_size=0,
            max_size=4,
        ),
        st.integers(0, 20),
    )
    def test_matches_brute_force_merge(self, arrays, tolerance):
        got = pool_changepoints(arrays, tolerance)
        assert list(got.points) == brute_pool([a.points for a in arrays], tolerance)


class TestKindDispatch:
    def test_number_uses_series_detector(self):
        series, _ = series_with_steps(4, [(90, 6.0)])
        data = ClueData(kind=DataKind.NUMBER, series=(series,))
        got = changepoints_for_data(data, WINDOW, STEP)
        assert got.points == detect_series(series, WINDOW).points

    def test_bag_pools_member_series(self):
        s1, _ = series_with_steps(6, [(40, 7.0)])
        s2, _ = series_with_steps(7, [(120, 7.0)])
        data = ClueData(kind=DataKind.BAG, series=(s1, s2))
        got = changepoints_for_data(data, WINDOW, STEP)
        want = pool_changepoints(
            [detect_series(s1, WINDOW), detect_series(s2, WINDOW)], STEP
        )
        assert got.points == want.points

    def test_string_uses_event_boundaries(self):
        seq = EventSequenceData([(0, 800, "v1"), (800, N * STEP, "v2")])
        data = ClueData(kind=DataKind.STRING, events=(seq,))
        assert changepoints_for_data(data, WINDOW, STEP).points == (800,)

    def test_set_pools_member_sequences(self):
        e1 = EventSequenceData([(0, 600, "m1"), (600, N * STEP, "m2")], label="a")
        e2 = EventSequenceData([(0, 900, "m1"), (900, N * STEP, "m3")], label="b")
        data = ClueData(kind=DataKind.SET, events=(e1, e2))
        got = changepoints_for_data(data, WINDOW, STEP)
        assert got.points == (600, 900)


class TestSampleOffsets:
    def test_offsets_are_sample_units(self):
        cpa = ChangePointArray((30, 90, 150))
        got = sample_offsets(cpa, TimeWindow(0, 300), 30)
        assert got.tolist() == [1.0, 3.0, 5.0]

    def test_strictness_of_array_order(self):
        with pytest.raises(InvalidArgumentError):
            ChangePointArray((5, 5))
