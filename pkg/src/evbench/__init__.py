"""Benchmark evaluation and dataset diagnostics for event-camera state estimation."""

from .geometry import Pose, Rotation, Twist, exp_se3, interpolate_pose, log_se3, pose_norm
from .ingest import (
    ClockMap,
    Event,
    EventStream,
    SyncMarker,
    Trajectory,
    TrajectorySample,
    apply_clock_map,
    build_clock_map,
    parse_events,
    parse_trajectory,
)
from .alignment import (
    AssociatedPair,
    SimilarityTransform,
    associate,
    solve_hand_eye,
    transform_trajectory,
    umeyama_align,
)
from .metrics import (
    ErrorSeries,
    MetricReport,
    PrecisionCurve,
    VelocitySample,
    VelocitySeries,
    aggregate,
    ate_series,
    curve_auc,
    derive_velocities,
    precision_curve,
    rpe_series,
    rve_series,
    weights,
)
from .diagnostics import (
    FlowDifficulty,
    StereoCountReport,
    TimeMap,
    flow_difficulty,
    max_reliable_depth,
    stereo_count_ratio,
    time_map,
    windowed_event_counts,
)
from .synth import MotionPattern, NoiseModel, perturb_trajectory, synth_event_rate_stream, synth_trajectory
from .focus import FocusConfig, FocusMonitor, FocusSnapshot, create_app, replay_snapshots

__version__ = "0.1.0"
