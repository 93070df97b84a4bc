import fractions

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evbench.diagnostics import (
    depth_relative_error,
    flow_difficulty,
    max_reliable_depth,
    stereo_count_ratio,
    time_map,
    windowed_event_counts,
)
from evbench.ingest import EventStream


def random_stream(rng, n, width=64, height=48, t_max_us=5_000_000):
    t = np.sort(rng.integers(0, t_max_us, n)).astype(np.int64)
    return EventStream(
        width,
        height,
        t,
        rng.integers(0, width, n),
        rng.integers(0, height, n),
        np.where(rng.random(n) < 0.5, -1, 1).astype(np.int8),
    )


def brute_force_time_map(stream, t0, t1):
    values = np.full((stream.height, stream.width), -np.inf)
    t_s = stream.t_seconds()
    for k in range(len(stream)):
        ts = t_s[k]
        if t0 <= ts < t1:
            y, x = stream.y[k], stream.x[k]
            if ts > values[y, x]:
                values[y, x] = ts
    return values


def brute_force_window_counts(stream, window_s):
    t = np.asarray(stream.t, dtype=np.float64)
    if t.size == 0:
        return np.zeros(0, dtype=np.int64)
    window_us = window_s * 1e6
    t0 = float(t[0])
    span = float(t[-1]) - t0
    n_windows = int(span // window_us) + 1
    counts = []
    for k in range(n_windows):
        lo = t0 + k * window_us
        hi = t0 + (k + 1) * window_us
        counts.append(int(np.count_nonzero((t >= lo) & (t < hi))))
    return np.array(counts, dtype=np.int64)


class TestStereoCountRatio:
    def test_equal_counts(self):
        rep = stereo_count_ratio(1000, 1000)
        assert rep.ratio_percent == 0.0
        assert not rep.inconsistent

    def test_mvsec_indoor_flying3(self):
        # printed +9.68 comes from unrounded counts; 3-decimal counts give +9.69
        rep = stereo_count_ratio(int(2.400e7), int(2.188e7))
        assert rep.ratio_percent == pytest.approx(9.69, abs=0.01)
        assert abs(rep.ratio_percent - 9.68) < 0.1
        assert not rep.inconsistent

    def test_hku_aggressive_small_flip(self):
        rep = stereo_count_ratio(int(1.031e8), int(1.516e8))
        assert rep.ratio_percent == pytest.approx(-31.99, abs=0.005)
        assert rep.inconsistent

    def test_zero_right_count(self):
        with pytest.raises(ValueError):
            stereo_count_ratio(10, 0)

    def test_accepts_streams(self, rng):
        left = random_stream(rng, 110)
        right = random_stream(rng, 100)
        rep = stereo_count_ratio(left, right)
        assert rep.ratio_percent == pytest.approx(10.0)

    @settings(max_examples=100)
    @given(st.integers(0, 10**9), st.integers(1, 10**9))
    def test_formula_matches_rational_arithmetic(self, left, right):
        rep = stereo_count_ratio(left, right)
        exact = fractions.Fraction(100 * (left - right), right)
        assert rep.ratio_percent == pytest.approx(float(exact), rel=1e-12, abs=1e-12)


class TestTimeMap:
    def test_single_event(self):
        s = EventStream(64, 48, np.array([1000]), np.array([10]), np.array([20]),
                        np.array([1], dtype=np.int8))
        tm = time_map(s, (0.0, 1.0))
        assert tm.valid().sum() == 1
        assert tm.valid()[20, 10]
        assert tm.values[20, 10] == pytest.approx(0.001)

    def test_newest_wins(self):
        s = EventStream(
            8, 8,
            np.array([1_000_000, 2_000_000]),
            np.array([3, 3]), np.array([4, 4]),
            np.array([1, -1], dtype=np.int8),
        )
        tm = time_map(s, (0.0, 10.0))
        assert tm.values[4, 3] == pytest.approx(2.0)

    def test_window_excludes_outside(self):
        s = EventStream(8, 8, np.array([500_000, 1_500_000]),
                        np.array([1, 2]), np.array([1, 2]),
                        np.array([1, 1], dtype=np.int8))
        tm = time_map(s, (1.0, 2.0))
        assert not tm.valid()[1, 1]
        assert tm.valid()[2, 2]

    def test_empty_window_all_background(self, rng):
        s = random_stream(rng, 100)
        tm = time_map(s, (100.0, 101.0))
        assert tm.valid().sum() == 0

    def test_matches_brute_force(self, rng):
        for _ in range(10):
            s = random_stream(rng, int(rng.integers(1, 3000)))
            t0, t1 = sorted(rng.uniform(0, 5.0, 2))
            if t0 == t1:
                continue
            tm = time_map(s, (t0, t1))
            assert np.array_equal(tm.values, brute_force_time_map(s, t0, t1))

    def test_normalized_range(self, rng):
        s = random_stream(rng, 500)
        tm = time_map(s, (0.0, 5.0))
        norm = tm.normalized()
        assert norm.min() >= 0.0 and norm.max() <= 1.0

    def test_pgm_export(self, rng, tmp_path):
        s = random_stream(rng, 200)
        tm = time_map(s, (0.0, 5.0))
        path = tmp_path / "map.pgm"
        tm.write_pgm(str(path))
        data = path.read_bytes()
        assert data.startswith(b"P5\n64 48\n65535\n")
        gray = np.frombuffer(
            data[len(b"P5\n64 48\n65535\n"):], dtype=">u2"
        ).reshape(48, 64)
        assert np.array_equal(gray == 0, ~tm.valid())


class TestFlowDifficulty:
    def test_zero_flow_zero_auc(self):
        fd = flow_difficulty(np.zeros((10, 10, 2)), 10, 10)
        assert fd.auc == 0.0

    def test_diagonal_magnitudes_unit_auc(self):
        diag = np.hypot(640, 480)
        fd = flow_difficulty(np.full(100, diag), 640, 480)
        assert fd.auc == pytest.approx(1.0, abs=1 / 255)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            flow_difficulty(np.zeros(0), 640, 480)

    def test_field_and_magnitudes_agree(self, rng):
        field = rng.standard_normal((8, 9, 2)) * 30
        mags = np.linalg.norm(field, axis=-1).ravel()
        a = flow_difficulty(field, 64, 48)
        b = flow_difficulty(mags, 64, 48)
        assert a.auc == b.auc

    @settings(max_examples=40)
    @given(st.integers(0, 2**31), st.floats(1.0, 10.0))
    def test_scaling_up_never_decreases_auc(self, seed, k):
        rng = np.random.default_rng(seed)
        mags = rng.uniform(0, 400, 50)
        a = flow_difficulty(mags, 640, 480)
        b = flow_difficulty(k * mags, 640, 480)
        assert b.auc >= a.auc - 1e-12

    @settings(max_examples=30)
    @given(st.integers(0, 2**31))
    def test_permutation_invariant(self, seed):
        rng = np.random.default_rng(seed)
        mags = rng.uniform(0, 500, 64)
        a = flow_difficulty(mags, 640, 480)
        b = flow_difficulty(rng.permutation(mags), 640, 480)
        assert a.auc == b.auc


class TestMaxReliableDepth:
    def test_paper_parameters(self):
        d = max_reliable_depth(520.0, 0.10, 0.15, 0.5)
        assert d == pytest.approx(13.565, abs=5e-4)

    def test_linear_in_baseline(self):
        d1 = max_reliable_depth(520.0, 0.10, 0.15, 0.5)
        d2 = max_reliable_depth(520.0, 0.20, 0.15, 0.5)
        assert d2 == pytest.approx(2 * d1, rel=1e-12)

    def test_error_branches_at_bound(self):
        eps, du = 0.15, 0.5
        d_min = du * (1 + eps) / eps
        worst, best = depth_relative_error(d_min, du)
        assert worst == pytest.approx(eps, rel=1e-12)
        assert best < eps

    def test_invalid_parameters(self):
        for args in [(520, 0.1, 0.0, 0.5), (520, 0.1, 1.5, 0.5), (520, 0.1, 0.15, 0.0),
                     (0, 0.1, 0.15, 0.5)]:
            with pytest.raises(ValueError):
                max_reliable_depth(*args)

    def test_against_bisection(self, rng):
        # independent root-finding on the worst-branch error du/(d - du) == eps
        for _ in range(200):
            fx = rng.uniform(100, 2000)
            b = rng.uniform(0.01, 1.0)
            eps = rng.uniform(0.01, 0.9)
            du = rng.uniform(0.05, 3.0)
            lo, hi = du * (1 + 1e-12), du * 1e9
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if du / (mid - du) > eps:
                    lo = mid
                else:
                    hi = mid
            oracle = fx * b / (0.5 * (lo + hi))
            got = max_reliable_depth(fx, b, eps, du)
            assert got == pytest.approx(oracle, rel=1e-6)


class TestWindowedCounts:
    def test_empty_stream(self):
        s = EventStream(8, 8, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64),
                        np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int8))
        wc = windowed_event_counts(s, 5.0)
        assert len(wc) == 0

    def test_all_in_one_window(self, rng):
        n = 100
        t = np.sort(rng.integers(0, 4_999_999, n)).astype(np.int64)
        s = EventStream(8, 8, t, np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64),
                        np.ones(n, dtype=np.int8))
        wc = windowed_event_counts(s, 5.0)
        assert wc.counts.tolist() == [100]

    def test_trailing_partial_flagged(self):
        t = np.array([0, 7_000_000], dtype=np.int64)
        s = EventStream(8, 8, t, np.zeros(2, dtype=np.int64), np.zeros(2, dtype=np.int64),
                        np.ones(2, dtype=np.int8))
        wc = windowed_event_counts(s, 5.0)
        assert wc.counts.tolist() == [1, 1]
        assert wc.last_partial

    def test_matches_brute_force(self, rng):
        for _ in range(10):
            s = random_stream(rng, int(rng.integers(1, 4000)))
            window = float(rng.uniform(0.05, 2.0))
            wc = windowed_event_counts(s, window)
            assert np.array_equal(wc.counts, brute_force_window_counts(s, window))
