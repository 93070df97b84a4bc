"""Temporal association, SE(3)/Sim(3) batch alignment, and hand-eye extrinsics.

The similarity alignment is the closed-form least-squares solution (SVD of the
cross-covariance with determinant correction); hand-eye uses the linear dual
quaternion formulation, solving rotation and translation jointly from the null
space of the stacked motion constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose, Rotation, interpolate_pose, pose_norm
from .ingest import Trajectory


class DegenerateGeometryError(ValueError):
    """Input geometry does not determine the requested transform."""


@dataclass(frozen=True)
class AssociatedPair:
    t: float
    pose_gt: Pose
    pose_est: Pose


@dataclass(frozen=True)
class SimilarityTransform:
    """p -> scale * R p + t. scale == 1 for rigid alignment."""

    scale: float
    pose: Pose

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("similarity scale must be positive")

    @staticmethod
    def identity() -> "SimilarityTransform":
        return SimilarityTransform(1.0, Pose.identity())

    def apply_point(self, p) -> np.ndarray:
        return self.scale * self.pose.rotation.apply(p) + self.pose.translation

    def apply_pose(self, pose: Pose) -> Pose:
        return Pose(
            self.pose.rotation.compose(pose.rotation),
            self.scale * self.pose.rotation.apply(pose.translation)
            + self.pose.translation,
        )

    def inverse(self) -> "SimilarityTransform":
        rinv = self.pose.rotation.inverse()
        return SimilarityTransform(
            1.0 / self.scale,
            Pose(rinv, -rinv.apply(self.pose.translation) / self.scale),
        )


def default_max_dt(gt: Trajectory) -> float:
    """1.5x the median ground-truth sample spacing."""
    return 1.5 * gt.median_dt()


def associate(
    est: Trajectory,
    gt: Trajectory,
    max_dt: float,
    mode: str = "interpolate",
) -> list[AssociatedPair]:
    """Pair every estimate sample with ground truth at (or near) its timestamp.

    `interpolate` evaluates ground truth at the estimate's timestamp between
    its bracketing samples; `nearest` picks the closest ground-truth sample.
    Estimate samples without a match within max_dt are dropped.
    """
    if mode not in ("nearest", "interpolate"):
        raise ValueError(f"unknown association mode: {mode!r}")
    gt_t = gt.t
    pairs: list[AssociatedPair] = []
    for i in range(len(est)):
        te = float(est.t[i])
        j = int(np.searchsorted(gt_t, te))
        if mode == "nearest":
            cand = [k for k in (j - 1, j) if 0 <= k < len(gt)]
            k = min(cand, key=lambda k: abs(gt_t[k] - te))
            if abs(gt_t[k] - te) > max_dt:
                continue
            pairs.append(AssociatedPair(te, gt.pose(k), est.pose(i)))
        else:
            if j == 0:
                if gt_t[0] != te:
                    continue  # before ground-truth span
                lo, hi = 0, 0
            elif j >= len(gt):
                continue  # past ground-truth span
            else:
                lo, hi = j - 1, j
            if min(te - gt_t[lo], gt_t[hi] - te) > max_dt:
                continue
            if lo == hi:
                pose_gt = gt.pose(lo)
            else:
                alpha = (te - gt_t[lo]) / (gt_t[hi] - gt_t[lo])
                pose_gt = interpolate_pose(gt.pose(lo), gt.pose(hi), alpha)
            pairs.append(AssociatedPair(te, pose_gt, est.pose(i)))
    if not pairs:
        raise ValueError("no temporal overlap between estimate and ground truth")
    return pairs


def umeyama_align(pairs, with_scale: bool = False) -> SimilarityTransform:
    """Least-squares similarity mapping estimate positions onto ground truth.

    Minimizes sum_i || p_gt_i - (s R p_est_i + t) ||^2; s is fixed to 1
    unless with_scale is set.
    """
    pairs = list(pairs)
    if len(pairs) < 3:
        raise DegenerateGeometryError("alignment needs at least 3 pairs")
    src = np.array([p.pose_est.translation for p in pairs])
    dst = np.array([p.pose_gt.translation for p in pairs])

    mu_src = src.mean(axis=0)
    mu_dst = dst.mean(axis=0)
    d_src = src - mu_src
    d_dst = dst - mu_dst
    n = len(pairs)

    cov = d_dst.T @ d_src / n
    u, d, vt = np.linalg.svd(cov)
    var_src = float((d_src**2).sum()) / n
    if var_src < 1e-24 or d[1] < 1e-9 * max(d[0], 1e-300):
        raise DegenerateGeometryError(
            "ground-truth positions are coincident or collinear; rotation is "
            "unobservable"
        )
    s_mat = np.eye(3)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        s_mat[2, 2] = -1.0
    rot = u @ s_mat @ vt
    scale = float((d * s_mat.diagonal()).sum() / var_src) if with_scale else 1.0
    if scale <= 0:
        raise DegenerateGeometryError("non-positive alignment scale")
    trans = mu_dst - scale * rot @ mu_src
    return SimilarityTransform(scale, Pose(Rotation.from_matrix(rot), trans))


def alignment_residual(pairs, transform: SimilarityTransform) -> float:
    """Sum of squared position residuals under the given alignment."""
    return float(
        sum(
            np.sum((p.pose_gt.translation - transform.apply_point(p.pose_est.translation)) ** 2)
            for p in pairs
        )
    )


def transform_trajectory(traj: Trajectory, s: SimilarityTransform) -> Trajectory:
    """Map every pose through the similarity; timestamps untouched."""
    rq = s.pose.rotation
    quats = np.array([rq.compose(Rotation(q)).q for q in traj.quats])
    rot = rq.matrix()
    positions = s.scale * traj.positions @ rot.T + s.pose.translation
    return Trajectory(traj.t, positions, quats)


# ---------------------------------------------------------------------------
# hand-eye calibration (A X = X B), dual quaternion formulation

@dataclass(frozen=True)
class HandEyeResult:
    x: Pose
    residual: float  # sum over pairs of pose_norm(inv(A X) (X B))^2


def relative_motions(poses) -> list[Pose]:
    """Consecutive relative motions inv(P_i) P_{i+1} of an absolute pose sequence."""
    poses = list(poses)
    return [poses[i].inverse().compose(poses[i + 1]) for i in range(len(poses) - 1)]


def _dual_quaternion(p: Pose):
    """(real, dual) quaternion parts, both (w, x, y, z)."""
    r = p.rotation.q
    t = p.translation
    # dual = 1/2 (0, t) * r
    w, x, y, z = r
    dual = 0.5 * np.array(
        [
            -t[0] * x - t[1] * y - t[2] * z,
            t[0] * w + t[1] * z - t[2] * y,
            -t[0] * z + t[1] * w + t[2] * x,
            t[0] * y - t[1] * x + t[2] * w,
        ]
    )
    return r, dual


def _skew(v):
    return np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])


def solve_hand_eye(motion_pairs) -> HandEyeResult:
    """Solve A_i X = X B_i for X from a list of motion pairs (A_i, B_i).

    Needs rotation axes spanning at least two directions; a common axis leaves
    the translation component along it unobservable and raises
    DegenerateGeometryError.
    """
    motion_pairs = list(motion_pairs)
    if len(motion_pairs) < 2:
        raise ValueError("hand-eye needs at least 2 motion pairs")

    _check_axis_span(motion_pairs)

    rows = []
    for a_pose, b_pose in motion_pairs:
        a_r, a_d = _dual_quaternion(a_pose)
        b_r, b_d = _dual_quaternion(b_pose)
        # Screw congruence: a valid pair has equal real and dual scalar parts,
        # so flip b's double-cover sign when the scalars match better negated.
        same = abs(a_r[0] - b_r[0]) + abs(a_d[0] - b_d[0])
        flipped = abs(a_r[0] + b_r[0]) + abs(a_d[0] + b_d[0])
        if flipped < same:
            b_r, b_d = -b_r, -b_d
        av, bv = a_r[1:], b_r[1:]
        adv, bdv = a_d[1:], b_d[1:]
        block = np.zeros((6, 8))
        block[0:3, 0] = av - bv
        block[0:3, 1:4] = _skew(av + bv)
        block[3:6, 0] = adv - bdv
        block[3:6, 1:4] = _skew(adv + bdv)
        block[3:6, 4] = av - bv
        block[3:6, 5:8] = _skew(av + bv)
        rows.append(block)
    t_mat = np.concatenate(rows)

    u, s, vt = np.linalg.svd(t_mat)
    # Generic motion leaves exactly a 2-dimensional null space.
    if s[5] < 1e-8 * max(s[0], 1e-300):
        raise DegenerateGeometryError(
            "motion rotation axes span fewer than 2 directions; translation "
            "is unobservable"
        )
    v7 = vt[6]
    v8 = vt[7]
    u1, w1 = v7[:4], v7[4:]
    u2, w2 = v8[:4], v8[4:]

    # x = l1 v7 + l2 v8 with ||real|| = 1 and real . dual = 0.
    a = float(u1 @ w1)
    b = float(u1 @ w2 + u2 @ w1)
    c = float(u2 @ w2)
    if abs(a) < 1e-14:
        roots = [-c / b] if abs(b) > 1e-14 else [0.0]
    else:
        disc = max(b * b - 4 * a * c, 0.0)
        roots = [(-b + math.sqrt(disc)) / (2 * a), (-b - math.sqrt(disc)) / (2 * a)]

    def real_norm_sq(sr):
        return sr * sr * float(u1 @ u1) + 2 * sr * float(u1 @ u2) + float(u2 @ u2)

    s_best = max(roots, key=real_norm_sq)
    l2 = 1.0 / math.sqrt(real_norm_sq(s_best))
    l1 = s_best * l2
    q_real = l1 * u1 + l2 * u2
    q_dual = l1 * w1 + l2 * w2

    rotation = Rotation(q_real)
    # t = 2 * vec(dual * conj(real))
    w, x, y, z = q_real
    dw, dx, dy, dz = q_dual
    translation = 2.0 * np.array(
        [
            -dw * x + dx * w - dy * z + dz * y,
            -dw * y + dx * z + dy * w - dz * x,
            -dw * z - dx * y + dy * x + dz * w,
        ]
    )
    x_pose = Pose(rotation, translation)

    residual = sum(
        pose_norm(a_pose.compose(x_pose).inverse().compose(x_pose.compose(b_pose))) ** 2
        for a_pose, b_pose in motion_pairs
    )
    return HandEyeResult(x_pose, float(residual))


def _check_axis_span(motion_pairs):
    axes = []
    for a_pose, _ in motion_pairs:
        rv = a_pose.rotation.to_rotvec()
        n = np.linalg.norm(rv)
        if n > 1e-8:
            axes.append(rv / n)
    if len(axes) < 2:
        raise DegenerateGeometryError(
            "fewer than 2 rotating motions; hand-eye is unobservable"
        )
    axes = np.array(axes)
    # Rank of the axis set: a shared (up to sign) axis gives rank 1.
    sv = np.linalg.svd(axes, compute_uv=False)
    if sv[1] < 1e-6 * sv[0]:
        raise DegenerateGeometryError(
            "motion rotation axes span fewer than 2 directions; translation "
            "is unobservable"
        )
