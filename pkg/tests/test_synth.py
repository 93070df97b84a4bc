import numpy as np
import pytest

from evbench.diagnostics import windowed_event_counts
from evbench.metrics import derive_velocities
from evbench.synth import (
    MotionPattern,
    NoiseModel,
    constant_offset,
    perturb_trajectory,
    synth_event_rate_stream,
    synth_trajectory,
)

ALL_PATTERNS = [
    MotionPattern("line", duration=4.0, sample_hz=120.0, speed=2.0),
    MotionPattern("circle", duration=4.0, sample_hz=120.0, radius=2.0, rate=1.0),
    MotionPattern("lemniscate", duration=4.0, sample_hz=120.0, radius=1.5, rate=0.8),
    MotionPattern(
        "spin_circle", duration=4.0, sample_hz=120.0, radius=2.0, rate=1.0,
        spin_rate=3.0,
    ),
]


class TestSynthTrajectory:
    def test_line_speed_exact(self):
        _, vel = synth_trajectory(ALL_PATTERNS[0])
        assert np.all(vel.speeds() == 2.0)

    def test_circle_speed_and_rate_exact(self):
        _, vel = synth_trajectory(ALL_PATTERNS[1])
        assert np.allclose(vel.speeds(), 2.0, atol=1e-14)
        assert np.allclose(np.linalg.norm(vel.omega, axis=1), 1.0, atol=1e-14)

    def test_spin_circle_body_rate_exact(self):
        _, vel = synth_trajectory(ALL_PATTERNS[3])
        assert np.allclose(np.linalg.norm(vel.omega, axis=1), 3.0)

    @pytest.mark.parametrize("pattern", ALL_PATTERNS, ids=lambda p: p.kind)
    def test_derived_velocities_match_analytic(self, pattern):
        # ties the finite-difference pipeline to the closed-form derivatives
        traj, vel = synth_trajectory(pattern)
        derived = derive_velocities(traj)
        interior = slice(2, -2)
        assert np.allclose(derived.v[interior], vel.v[interior], atol=1e-3)
        assert np.allclose(derived.omega[interior], vel.omega[interior], atol=1e-3)

    def test_bad_pattern_kind(self):
        with pytest.raises(ValueError):
            MotionPattern("zigzag", duration=1.0, sample_hz=10.0)


class TestPerturb:
    def test_zero_noise_identity(self, rng):
        traj, _ = synth_trajectory(ALL_PATTERNS[1])
        out = perturb_trajectory(traj, NoiseModel(0.0, 0.0, seed=7))
        assert out is traj

    def test_deterministic_per_seed(self):
        traj, _ = synth_trajectory(ALL_PATTERNS[1])
        a = perturb_trajectory(traj, NoiseModel(0.01, 0.002, seed=3))
        b = perturb_trajectory(traj, NoiseModel(0.01, 0.002, seed=3))
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.quats, b.quats)

    def test_position_noise_magnitude(self):
        pattern = MotionPattern("line", duration=100.0, sample_hz=100.0, speed=1.0)
        traj, _ = synth_trajectory(pattern)
        assert len(traj) > 10_000
        noisy = perturb_trajectory(traj, NoiseModel(0.01, 0.0, seed=11))
        mean_err = np.linalg.norm(noisy.positions - traj.positions, axis=1).mean()
        assert 0.005 <= mean_err <= 0.03

    def test_constant_offset_helper(self):
        traj, _ = synth_trajectory(ALL_PATTERNS[1])
        out = constant_offset(traj, [0.0, 3.0, 4.0])
        d = np.linalg.norm(out.positions - traj.positions, axis=1)
        assert np.allclose(d, 5.0)


class TestEventRateStream:
    def test_zero_rate_empty(self):
        s = synth_event_rate_stream([(0.0, 0.0), (5.0, 0.0)], (64, 48), seed=1)
        assert len(s) == 0

    def test_poisson_count_bounds(self):
        for seed in range(5):
            s = synth_event_rate_stream([(0.0, 1000.0), (10.0, 0.0)], (64, 48), seed=seed)
            assert 9000 <= len(s) <= 11000  # 3 sigma is ~300 around 10000

    def test_step_profile_ratio(self):
        s = synth_event_rate_stream(
            [(0.0, 1000.0), (5.0, 5000.0), (10.0, 0.0)], (64, 48), seed=5
        )
        wc = windowed_event_counts(s, 1.0)
        before = wc.counts[1:4].mean()
        after = wc.counts[6:9].mean()
        assert after / before == pytest.approx(5.0, rel=0.2)

    def test_deterministic(self):
        a = synth_event_rate_stream([(0.0, 500.0), (2.0, 0.0)], (64, 48), seed=9)
        b = synth_event_rate_stream([(0.0, 500.0), (2.0, 0.0)], (64, 48), seed=9)
        assert np.array_equal(np.asarray(a.t), np.asarray(b.t))
        assert np.array_equal(a.x, b.x)

    def test_rejects_bad_profile(self):
        with pytest.raises(ValueError):
            synth_event_rate_stream([(0.0, -5.0), (1.0, 0.0)], (64, 48))
        with pytest.raises(ValueError):
            synth_event_rate_stream([(0.0, 5.0)], (64, 48))
