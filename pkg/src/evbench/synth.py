"""Synthetic trajectory, velocity, and event-rate generators.

Every generator is deterministic under a fixed seed, and trajectories come
with exact closed-form velocities so downstream metric tests never rely on
numerical differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose, Rotation
from .ingest import EventStream, Trajectory
from .metrics import VelocitySeries

PATTERN_KINDS = ("line", "circle", "lemniscate", "spin_circle")


@dataclass(frozen=True)
class MotionPattern:
    """Analytic motion: line (speed m/s), circle (radius m, rate rad/s),
    lemniscate (radius m, rate rad/s), spin_circle (circle plus an
    independent body yaw at spin_rate rad/s)."""

    kind: str
    duration: float
    sample_hz: float
    radius: float = 1.0
    rate: float = 1.0  # rad/s (angular patterns) or m/s scale for line
    speed: float = 1.0  # m/s, line only
    spin_rate: float = 0.0  # rad/s body yaw, spin_circle only

    def __post_init__(self):
        if self.kind not in PATTERN_KINDS:
            raise ValueError(f"unknown motion pattern: {self.kind!r}")
        if self.duration <= 0 or self.sample_hz <= 0:
            raise ValueError("duration and sample_hz must be positive")


@dataclass(frozen=True)
class NoiseModel:
    position_sigma: float = 0.0  # meters
    rotation_sigma: float = 0.0  # radians
    seed: int = 0

    def __post_init__(self):
        if self.position_sigma < 0 or self.rotation_sigma < 0:
            raise ValueError("noise sigmas must be non-negative")


def synth_trajectory(pattern: MotionPattern) -> tuple[Trajectory, VelocitySeries]:
    """Sample the pattern analytically; returned velocities are exact derivatives."""
    n = int(round(pattern.duration * pattern.sample_hz)) + 1
    t = np.arange(n) / pattern.sample_hz

    if pattern.kind == "line":
        direction = np.array([1.0, 0.0, 0.0])
        positions = np.outer(t, pattern.speed * direction)
        quats = np.tile([1.0, 0.0, 0.0, 0.0], (n, 1))
        v = np.tile(pattern.speed * direction, (n, 1))
        omega = np.zeros((n, 3))

    elif pattern.kind in ("circle", "spin_circle"):
        r, w = pattern.radius, pattern.rate
        th = w * t
        positions = np.column_stack([r * np.cos(th), r * np.sin(th), np.zeros(n)])
        v = np.column_stack([-r * w * np.sin(th), r * w * np.cos(th), np.zeros(n)])
        if pattern.kind == "circle":
            # yaw tracks the tangent: body z-rate equals the orbit rate
            yaw = th + 0.5 * math.pi
            body_rate = w
        else:
            yaw = pattern.spin_rate * t
            body_rate = pattern.spin_rate
        quats = np.column_stack(
            [np.cos(0.5 * yaw), np.zeros(n), np.zeros(n), np.sin(0.5 * yaw)]
        )
        omega = np.tile([0.0, 0.0, body_rate], (n, 1))

    else:  # lemniscate (Gerono figure-eight), fixed orientation
        a, w = pattern.radius, pattern.rate
        th = w * t
        positions = np.column_stack(
            [a * np.sin(th), a * np.sin(th) * np.cos(th), np.zeros(n)]
        )
        v = np.column_stack(
            [a * w * np.cos(th), a * w * np.cos(2.0 * th), np.zeros(n)]
        )
        quats = np.tile([1.0, 0.0, 0.0, 0.0], (n, 1))
        omega = np.zeros((n, 3))

    traj = Trajectory(t, positions, quats)
    return traj, VelocitySeries(t, v, omega)


def perturb_trajectory(traj: Trajectory, noise: NoiseModel) -> Trajectory:
    """Add i.i.d. Gaussian position noise and small random rotations."""
    if noise.position_sigma == 0.0 and noise.rotation_sigma == 0.0:
        return traj
    rng = np.random.default_rng(noise.seed)
    positions = traj.positions + noise.position_sigma * rng.standard_normal(
        traj.positions.shape
    )
    quats = traj.quats
    if noise.rotation_sigma > 0.0:
        out = np.empty_like(quats)
        for i in range(len(traj)):
            dq = Rotation.from_rotvec(
                noise.rotation_sigma * rng.standard_normal(3)
            )
            out[i] = Rotation(quats[i]).compose(dq).q
        quats = out
    return Trajectory(traj.t, positions, quats)


def synth_event_rate_stream(
    profile,
    resolution: tuple[int, int] = (640, 480),
    seed: int = 0,
    camera_id: str = "",
) -> EventStream:
    """Poisson event stream with a piecewise-constant rate profile.

    `profile` is a sequence of (t_seconds, rate_ev_per_s) breakpoints; each
    rate holds until the next breakpoint, the last breakpoint ends the stream.
    """
    profile = [(float(t), float(r)) for t, r in profile]
    if len(profile) < 2:
        raise ValueError("profile needs at least 2 breakpoints")
    if any(r < 0 for _, r in profile):
        raise ValueError("rates must be non-negative")
    if any(profile[i + 1][0] <= profile[i][0] for i in range(len(profile) - 1)):
        raise ValueError("breakpoint times must be strictly increasing")

    width, height = resolution
    rng = np.random.default_rng(seed)
    times = []
    for (t0, rate), (t1, _) in zip(profile[:-1], profile[1:]):
        span = t1 - t0
        count = rng.poisson(rate * span)
        if count:
            times.append(t0 + span * rng.random(count))
    if not times:
        t_us = np.zeros(0, dtype=np.int64)
        xs = np.zeros(0, dtype=np.int64)
        ys = np.zeros(0, dtype=np.int64)
        ps = np.zeros(0, dtype=np.int8)
    else:
        t_s = np.sort(np.concatenate(times))
        t_us = np.round(t_s * 1e6).astype(np.int64)
        n = t_us.size
        xs = rng.integers(0, width, n)
        ys = rng.integers(0, height, n)
        ps = np.where(rng.random(n) < 0.5, -1, 1).astype(np.int8)
    return EventStream(width, height, t_us, xs, ys, ps, camera_id)


def constant_offset(traj: Trajectory, delta) -> Trajectory:
    """Left-compose every pose with a pure translation; positions shift by delta."""
    offset = Pose(Rotation.identity(), np.asarray(delta, dtype=np.float64))
    positions = traj.positions + offset.translation
    return Trajectory(traj.t, positions, traj.quats)
