import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evbench.alignment import (
    AssociatedPair,
    DegenerateGeometryError,
    SimilarityTransform,
    alignment_residual,
    associate,
    default_max_dt,
    relative_motions,
    solve_hand_eye,
    transform_trajectory,
    umeyama_align,
)
from evbench.geometry import Pose, Rotation, pose_norm, rot_z
from evbench.ingest import Trajectory


def make_traj(t, positions, quats=None):
    t = np.asarray(t, dtype=np.float64)
    positions = np.asarray(positions, dtype=np.float64)
    if quats is None:
        quats = np.tile([1.0, 0, 0, 0], (t.size, 1))
    return Trajectory(t, positions, quats)


def random_pose(rng, max_angle=2.5, scale=1.0):
    phi = rng.standard_normal(3)
    phi = phi / np.linalg.norm(phi) * rng.uniform(0.2, max_angle)
    return Pose(Rotation.from_rotvec(phi), scale * rng.standard_normal(3))


def pairs_from_trajectories(gt, est):
    return [
        AssociatedPair(float(gt.t[i]), gt.pose(i), est.pose(i))
        for i in range(len(gt))
    ]


class TestAssociate:
    def test_exact_timestamps_copy(self):
        gt = make_traj([0, 1, 2], [[0, 0, 0], [1, 0, 0], [2, 0, 0]])
        pairs = associate(gt, gt, max_dt=0.1)
        assert len(pairs) == 3
        for p, i in zip(pairs, range(3)):
            assert p.pose_gt.allclose(p.pose_est)

    def test_interpolated_midpoint(self):
        gt = make_traj([0.0, 0.02], [[0, 0, 0], [1, 0, 0]])
        est = make_traj([0.01], [[5, 5, 5]])
        pairs = associate(est, gt, max_dt=0.02, mode="interpolate")
        assert len(pairs) == 1
        assert pairs[0].t == 0.01
        assert np.allclose(pairs[0].pose_gt.translation, [0.5, 0, 0])

    def test_sample_outside_span_dropped(self):
        gt = make_traj(
            [0.0, 0.49, 0.51, 1.0], [[0, 0, 0], [1, 0, 0], [2, 0, 0], [3, 0, 0]]
        )
        est = make_traj([0.5, 5.0], [[0, 0, 0], [0, 0, 0]])
        pairs = associate(est, gt, max_dt=0.02)
        assert [p.t for p in pairs] == [0.5]

    def test_no_overlap_is_error(self):
        gt = make_traj([0.0, 1.0], [[0, 0, 0], [1, 0, 0]])
        est = make_traj([5.0, 6.0], [[0, 0, 0], [1, 0, 0]])
        with pytest.raises(ValueError, match="overlap"):
            associate(est, gt, max_dt=0.02)

    def test_nearest_mode(self):
        gt = make_traj([0.0, 1.0], [[0, 0, 0], [1, 0, 0]])
        est = make_traj([0.1], [[9, 9, 9]])
        pairs = associate(est, gt, max_dt=0.2, mode="nearest")
        assert np.allclose(pairs[0].pose_gt.translation, [0, 0, 0])

    def test_default_max_dt(self):
        gt = make_traj([0.0, 0.01, 0.02, 0.05], np.zeros((4, 3)))
        assert default_max_dt(gt) == pytest.approx(1.5 * 0.01)


class TestUmeyama:
    def test_identity_for_equal_sets(self, rng):
        pts = rng.standard_normal((10, 3))
        gt = make_traj(np.arange(10.0), pts)
        pairs = pairs_from_trajectories(gt, gt)
        sim = umeyama_align(pairs, with_scale=True)
        assert sim.scale == pytest.approx(1.0, abs=1e-12)
        assert pose_norm(sim.pose) < 1e-9

    def test_recovers_known_rigid_transform(self, rng):
        pts = rng.standard_normal((15, 3))
        world = random_pose(rng)
        gt = make_traj(np.arange(15.0), pts)
        est = make_traj(np.arange(15.0), np.array([world.apply(p) for p in pts]))
        # est = world(gt), so alignment est->gt must recover world^{-1}
        sim = umeyama_align(pairs_from_trajectories(gt, est), with_scale=False)
        assert sim.pose.allclose(world.inverse(), atol=1e-9)

    def test_recovers_scale_two(self, rng):
        pts = rng.standard_normal((12, 3))
        gt = make_traj(np.arange(12.0), pts)
        est = make_traj(np.arange(12.0), 0.5 * pts)
        sim = umeyama_align(pairs_from_trajectories(gt, est), with_scale=True)
        assert sim.scale == pytest.approx(2.0, abs=1e-9)

    def test_too_few_pairs(self, rng):
        gt = make_traj([0, 1], [[0, 0, 0], [1, 1, 1]])
        with pytest.raises(DegenerateGeometryError):
            umeyama_align(pairs_from_trajectories(gt, gt))

    def test_collinear_rejected(self):
        pts = np.outer(np.arange(5.0), [1.0, 0, 0])
        gt = make_traj(np.arange(5.0), pts)
        with pytest.raises(DegenerateGeometryError):
            umeyama_align(pairs_from_trajectories(gt, gt))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31), st.booleans())
    def test_transform_then_align_recovers_inverse(self, seed, with_scale):
        rng = np.random.default_rng(seed)
        pts = rng.standard_normal((10, 3))
        quats = rng.standard_normal((10, 4))
        quats /= np.linalg.norm(quats, axis=1, keepdims=True)
        gt = make_traj(np.arange(10.0), pts, quats)
        scale = rng.uniform(0.5, 2.0) if with_scale else 1.0
        sim = SimilarityTransform(scale, random_pose(rng))
        est = transform_trajectory(gt, sim)
        rec = umeyama_align(pairs_from_trajectories(gt, est), with_scale=with_scale)
        inv = sim.inverse()
        assert rec.scale == pytest.approx(inv.scale, abs=1e-8)
        assert rec.pose.allclose(inv.pose, atol=1e-8)

    def test_scale_never_hurts_residual(self, rng):
        pts = rng.standard_normal((20, 3))
        noisy = pts * 1.3 + 0.05 * rng.standard_normal((20, 3))
        gt = make_traj(np.arange(20.0), pts)
        est = make_traj(np.arange(20.0), noisy)
        pairs = pairs_from_trajectories(gt, est)
        r_rigid = alignment_residual(pairs, umeyama_align(pairs, with_scale=False))
        r_sim = alignment_residual(pairs, umeyama_align(pairs, with_scale=True))
        assert r_sim <= r_rigid + 1e-12


class TestTransformTrajectory:
    def test_identity_unchanged(self, rng):
        pts = rng.standard_normal((5, 3))
        gt = make_traj(np.arange(5.0), pts)
        out = transform_trajectory(gt, SimilarityTransform.identity())
        assert np.allclose(out.positions, gt.positions)
        assert np.allclose(out.t, gt.t)

    def test_pure_translation_shift(self, rng):
        pts = rng.standard_normal((5, 3))
        gt = make_traj(np.arange(5.0), pts)
        delta = np.array([1.0, -2.0, 3.0])
        sim = SimilarityTransform(1.0, Pose(Rotation.identity(), delta))
        out = transform_trajectory(gt, sim)
        assert np.allclose(out.positions, pts + delta)

    def test_scale_doubles_distances(self, rng):
        pts = rng.standard_normal((6, 3))
        gt = make_traj(np.arange(6.0), pts)
        sim = SimilarityTransform(2.0, Pose(Rotation.identity(), np.zeros(3)))
        out = transform_trajectory(gt, sim)
        d_in = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        d_out = np.linalg.norm(np.diff(out.positions, axis=0), axis=1)
        assert np.allclose(d_out, 2.0 * d_in)


class TestHandEye:
    def test_identity_motions_give_zero_residual_identity(self, rng):
        motions = [random_pose(rng) for _ in range(6)]
        res = solve_hand_eye([(m, m) for m in motions])
        assert res.residual < 1e-18
        assert pose_norm(res.x) < 1e-8

    def test_recovers_random_transform(self, rng):
        for _ in range(5):
            x = random_pose(rng)
            pairs = []
            for _ in range(10):
                b = random_pose(rng)
                a = x.compose(b).compose(x.inverse())
                pairs.append((a, b))
            res = solve_hand_eye(pairs)
            assert pose_norm(res.x.inverse().compose(x)) < 1e-6
            assert res.residual < 1e-12

    def test_single_axis_degenerate(self, rng):
        x = random_pose(rng)
        pairs = []
        for _ in range(8):
            b = Pose(rot_z(rng.uniform(0.3, 2.0)), rng.standard_normal(3))
            a = x.compose(b).compose(x.inverse())
            pairs.append((a, b))
        with pytest.raises(DegenerateGeometryError, match="unobservable"):
            solve_hand_eye(pairs)

    def test_invariant_under_common_left_frame_change(self, rng):
        # motions derived from absolute sequences cancel a shared world frame
        x = random_pose(rng)
        abs_b = [random_pose(rng)]
        for _ in range(10):
            abs_b.append(abs_b[-1].compose(random_pose(rng, max_angle=1.5)))
        abs_a = [x.compose(b).compose(x.inverse()) for b in abs_b]

        world = random_pose(rng)
        abs_a_shifted = [world.compose(a) for a in abs_a]

        pairs = list(zip(relative_motions(abs_a), relative_motions(abs_b)))
        pairs_shifted = list(zip(relative_motions(abs_a_shifted), relative_motions(abs_b)))
        x1 = solve_hand_eye(pairs).x
        x2 = solve_hand_eye(pairs_shifted).x
        assert pose_norm(x1.inverse().compose(x2)) < 1e-8
