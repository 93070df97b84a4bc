"""Rigid-body math: quaternion rotations, SE(3) exp/log, norms, interpolation.

Conventions: quaternions are stored (w, x, y, z) and renormalized after every
composition; twists are (rho, phi) with rho the translational part in meters
and phi the rotational part in radians. The SE(3) log uses the exact
closed-form V-matrix inverse, so exp/log round-trip to machine precision for
rotation angles below pi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

_EPS = 1e-12
# Below this angle the trig coefficient formulas lose precision; switch to series.
_SMALL_ANGLE = 1e-6


class NonUniqueLogWarning(UserWarning):
    """Rotation angle is at (or numerically at) pi; the principal log is not unique."""


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Rotation:
    """Unit quaternion (w, x, y, z)."""

    q: np.ndarray

    def __init__(self, q):
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (4,):
            raise ValueError(f"quaternion must have 4 components, got shape {q.shape}")
        n = float(np.linalg.norm(q))
        if n < _EPS:
            raise ValueError("zero quaternion is not a rotation")
        object.__setattr__(self, "q", q / n)

    @staticmethod
    def identity() -> "Rotation":
        return Rotation(np.array([1.0, 0.0, 0.0, 0.0]))

    @staticmethod
    def from_rotvec(phi) -> "Rotation":
        """Exponential map so(3) -> SO(3), phi = angle * axis."""
        phi = _as_vec3(phi)
        theta = float(np.linalg.norm(phi))
        if theta < _SMALL_ANGLE:
            # sin(t/2)/t = 1/2 - t^2/48 + O(t^4)
            factor = 0.5 - theta * theta / 48.0
        else:
            factor = math.sin(0.5 * theta) / theta
        return Rotation(np.concatenate(([math.cos(0.5 * theta)], factor * phi)))

    def to_rotvec(self) -> np.ndarray:
        """Principal logarithm, angle in [0, pi]. Warns when the angle is at pi."""
        w, v = self._positive_w()
        s = float(np.linalg.norm(v))
        angle = 2.0 * math.atan2(s, w)
        if angle > math.pi - 1e-9:
            warnings.warn(
                "rotation angle at pi: logarithm is not unique, returning one "
                "principal value",
                NonUniqueLogWarning,
                stacklevel=2,
            )
        if s < _SMALL_ANGLE:
            # atan2(s, w)/s = 1/w - s^2/(3 w^3) + O(s^4)
            return (2.0 / w - 2.0 * s * s / (3.0 * w**3)) * v
        return (angle / s) * v

    def angle(self) -> float:
        w, v = self._positive_w()
        return 2.0 * math.atan2(float(np.linalg.norm(v)), w)

    def _positive_w(self):
        q = self.q if self.q[0] >= 0.0 else -self.q
        return float(q[0]), q[1:]

    def matrix(self) -> np.ndarray:
        w, x, y, z = self.q
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )

    @staticmethod
    def from_matrix(m) -> "Rotation":
        m = np.asarray(m, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError("rotation matrix must be 3x3")
        # Shepperd's method: pick the largest diagonal combination for stability.
        w2 = 1.0 + m[0, 0] + m[1, 1] + m[2, 2]
        x2 = 1.0 + m[0, 0] - m[1, 1] - m[2, 2]
        y2 = 1.0 - m[0, 0] + m[1, 1] - m[2, 2]
        z2 = 1.0 - m[0, 0] - m[1, 1] + m[2, 2]
        k = int(np.argmax([w2, x2, y2, z2]))
        if k == 0:
            w = 0.5 * math.sqrt(max(w2, 0.0))
            q = [w, (m[2, 1] - m[1, 2]) / (4 * w), (m[0, 2] - m[2, 0]) / (4 * w),
                 (m[1, 0] - m[0, 1]) / (4 * w)]
        elif k == 1:
            x = 0.5 * math.sqrt(max(x2, 0.0))
            q = [(m[2, 1] - m[1, 2]) / (4 * x), x, (m[0, 1] + m[1, 0]) / (4 * x),
                 (m[0, 2] + m[2, 0]) / (4 * x)]
        elif k == 2:
            y = 0.5 * math.sqrt(max(y2, 0.0))
            q = [(m[0, 2] - m[2, 0]) / (4 * y), (m[0, 1] + m[1, 0]) / (4 * y), y,
                 (m[1, 2] + m[2, 1]) / (4 * y)]
        else:
            z = 0.5 * math.sqrt(max(z2, 0.0))
            q = [(m[1, 0] - m[0, 1]) / (4 * z), (m[0, 2] + m[2, 0]) / (4 * z),
                 (m[1, 2] + m[2, 1]) / (4 * z), z]
        return Rotation(np.array(q))

    def compose(self, other: "Rotation") -> "Rotation":
        w1, x1, y1, z1 = self.q
        w2, x2, y2, z2 = other.q
        return Rotation(
            np.array(
                [
                    w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
                    w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
                    w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
                    w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
                ]
            )
        )

    def inverse(self) -> "Rotation":
        w, x, y, z = self.q
        return Rotation(np.array([w, -x, -y, -z]))

    def apply(self, v) -> np.ndarray:
        v = _as_vec3(v)
        w, qv = self.q[0], self.q[1:]
        # q v q*: Rodrigues form, 2 cross products.
        t = 2.0 * np.cross(qv, v)
        return v + w * t + np.cross(qv, t)

    def slerp(self, other: "Rotation", alpha: float) -> "Rotation":
        """Shortest-arc spherical interpolation from self (alpha=0) to other (alpha=1)."""
        q0, q1 = self.q, other.q
        dot = float(np.dot(q0, q1))
        if dot < 0.0:
            q1, dot = -q1, -dot
        dot = min(dot, 1.0)
        omega = math.acos(dot)
        if omega < _SMALL_ANGLE:
            return Rotation((1.0 - alpha) * q0 + alpha * q1)
        s = math.sin(omega)
        return Rotation(
            (math.sin((1.0 - alpha) * omega) / s) * q0
            + (math.sin(alpha * omega) / s) * q1
        )

    def allclose(self, other: "Rotation", atol: float = 1e-9) -> bool:
        # q and -q are the same rotation.
        return bool(
            np.allclose(self.q, other.q, atol=atol)
            or np.allclose(self.q, -other.q, atol=atol)
        )


@dataclass(frozen=True)
class Pose:
    """Rigid-body transform: p_world = rotation * p_body + translation."""

    rotation: Rotation
    translation: np.ndarray

    def __init__(self, rotation: Rotation, translation):
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", _as_vec3(translation))

    @staticmethod
    def identity() -> "Pose":
        return Pose(Rotation.identity(), np.zeros(3))

    @staticmethod
    def from_parts(q_wxyz, t) -> "Pose":
        return Pose(Rotation(q_wxyz), t)

    def compose(self, other: "Pose") -> "Pose":
        return Pose(
            self.rotation.compose(other.rotation),
            self.rotation.apply(other.translation) + self.translation,
        )

    def inverse(self) -> "Pose":
        rinv = self.rotation.inverse()
        return Pose(rinv, -rinv.apply(self.translation))

    def apply(self, p) -> np.ndarray:
        return self.rotation.apply(p) + self.translation

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation.matrix()
        m[:3, 3] = self.translation
        return m

    def allclose(self, other: "Pose", atol: float = 1e-9) -> bool:
        return self.rotation.allclose(other.rotation, atol=atol) and bool(
            np.allclose(self.translation, other.translation, atol=atol)
        )


@dataclass(frozen=True)
class Twist:
    """Element of se(3): rho translational (m), phi rotational (rad)."""

    rho: np.ndarray
    phi: np.ndarray

    def __init__(self, rho, phi):
        object.__setattr__(self, "rho", _as_vec3(rho))
        object.__setattr__(self, "phi", _as_vec3(phi))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.rho, self.phi])

    @staticmethod
    def from_vector(v) -> "Twist":
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (6,):
            raise ValueError("twist vector must have 6 components")
        return Twist(v[:3], v[3:])


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
    )


def _left_jacobian(phi: np.ndarray) -> np.ndarray:
    """V(phi) with exp([rho;phi]) translation = V rho."""
    theta = float(np.linalg.norm(phi))
    k = _skew(phi)
    if theta < _SMALL_ANGLE:
        a = 0.5 - theta * theta / 24.0
        b = 1.0 / 6.0 - theta * theta / 120.0
    else:
        a = (1.0 - math.cos(theta)) / (theta * theta)
        b = (theta - math.sin(theta)) / (theta**3)
    return np.eye(3) + a * k + b * (k @ k)


def _left_jacobian_inv(phi: np.ndarray) -> np.ndarray:
    """Exact closed-form inverse of V(phi); valid for |phi| < 2*pi."""
    theta = float(np.linalg.norm(phi))
    k = _skew(phi)
    if theta < _SMALL_ANGLE:
        c = 1.0 / 12.0 + theta * theta / 720.0
    else:
        half = 0.5 * theta
        c = (1.0 - half * math.cos(half) / math.sin(half)) / (theta * theta)
    return np.eye(3) - 0.5 * k + c * (k @ k)


def exp_se3(t: Twist) -> Pose:
    """SE(3) exponential map."""
    return Pose(Rotation.from_rotvec(t.phi), _left_jacobian(t.phi) @ t.rho)


def log_se3(p: Pose) -> Twist:
    """Principal SE(3) logarithm; |phi| <= pi.

    At a rotation angle of exactly pi the rotational log is not unique; one
    principal value is returned and a NonUniqueLogWarning is emitted.
    """
    phi = p.rotation.to_rotvec()
    return Twist(_left_jacobian_inv(phi) @ p.translation, phi)


def pose_norm(p: Pose) -> float:
    """Euclidean norm of the 6-vector log; zero iff p is the identity."""
    return float(np.linalg.norm(log_se3(p).as_vector()))


def interpolate_pose(a: Pose, b: Pose, alpha: float) -> Pose:
    """Shortest-arc slerp on rotation, linear on translation; alpha in [0, 1]."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"interpolation parameter must be in [0, 1], got {alpha}")
    return Pose(
        a.rotation.slerp(b.rotation, alpha),
        (1.0 - alpha) * a.translation + alpha * b.translation,
    )


def rot_z(angle: float) -> Rotation:
    return Rotation.from_rotvec(np.array([0.0, 0.0, angle]))


def rot_y(angle: float) -> Rotation:
    return Rotation.from_rotvec(np.array([0.0, angle, 0.0]))


def rot_x(angle: float) -> Rotation:
    return Rotation.from_rotvec(np.array([angle, 0.0, 0.0]))
