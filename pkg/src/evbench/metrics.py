"""Pose and velocity error metrics: per-sample ATE/RPE, aggregation, velocity
derivation, AVE/RVE, weighted precision curves, and curve AUC.

Aggregation note: the "paper_eq2" mode places 1/n outside the square root,
i.e. (1/n) * sqrt(sum e_i^2); "rms" is the conventional sqrt(mean(e^2)) and is
the headline mode. The two differ by exactly sqrt(n).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .alignment import SimilarityTransform
from .geometry import Pose, Rotation, pose_norm
from .ingest import Trajectory

ATE_PARTS = ("full_se3", "translation_only")
AGGREGATION_MODES = ("paper_eq2", "rms")
WEIGHT_SCHEMES = ("uniform", "velocity", "combined")

DEFAULT_SPEED_FLOOR = 0.05  # m/s; RVE is singular at zero ground-truth speed
DEFAULT_XI_GRID_POINTS = 256
DEFAULT_XI_MAX = 1.0


class IrregularSamplingWarning(UserWarning):
    """Timestamp spacing is wildly non-uniform; derived velocities may be poor."""


@dataclass(frozen=True)
class VelocitySample:
    t: float
    v: np.ndarray
    omega: np.ndarray | None


@dataclass(frozen=True)
class VelocitySeries:
    """Linear (world-frame, m/s) and angular (body-frame, rad/s) velocities."""

    t: np.ndarray
    v: np.ndarray
    omega: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        if t.ndim != 1 or v.shape != (t.size, 3):
            raise ValueError("inconsistent velocity array shapes")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite velocity component")
        omega = self.omega
        if omega is not None:
            omega = np.asarray(omega, dtype=np.float64)
            if omega.shape != (t.size, 3) or not np.all(np.isfinite(omega)):
                raise ValueError("bad angular velocity array")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "omega", omega)

    def __len__(self) -> int:
        return int(self.t.size)

    def __getitem__(self, i: int) -> VelocitySample:
        return VelocitySample(
            float(self.t[i]),
            self.v[i],
            None if self.omega is None else self.omega[i],
        )

    def speeds(self) -> np.ndarray:
        return np.linalg.norm(self.v, axis=1)


@dataclass(frozen=True)
class ErrorSeries:
    t: np.ndarray
    value: np.ndarray
    kind: str  # ate | rpe | ave | rve

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        v = np.asarray(self.value, dtype=np.float64)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("error series t/value length mismatch")
        if v.size and np.any(v < 0):
            raise ValueError("error values must be non-negative")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "value", v)

    def __len__(self) -> int:
        return int(self.t.size)


@dataclass(frozen=True)
class PrecisionCurve:
    """Weighted fraction of samples with relative error strictly below each
    threshold; non-decreasing, in [0, 1]."""

    xi: np.ndarray
    s: np.ndarray
    weighting: str

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=np.float64)
        s = np.asarray(self.s, dtype=np.float64)
        if xi.shape != s.shape or xi.ndim != 1 or xi.size < 2:
            raise ValueError("curve needs matching xi/s arrays of length >= 2")
        if np.any(np.diff(xi) <= 0):
            raise ValueError("threshold grid must be ascending")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "s", s)


def default_xi_grid(
    xi_max: float = DEFAULT_XI_MAX, points: int = DEFAULT_XI_GRID_POINTS
) -> np.ndarray:
    return np.linspace(0.0, xi_max, points)


# ---------------------------------------------------------------------------
# pose errors

def _pair_error(pose_gt: Pose, pose_est: Pose, part: str) -> float:
    if part == "translation_only":
        return float(np.linalg.norm(pose_gt.translation - pose_est.translation))
    if part == "full_se3":
        return pose_norm(pose_gt.inverse().compose(pose_est))
    raise ValueError(f"unknown error part: {part!r}")


def ate_series(pairs, part: str = "translation_only") -> ErrorSeries:
    """Per-sample absolute error between associated poses."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no associated pairs")
    t = np.array([p.t for p in pairs])
    value = np.array([_pair_error(p.pose_gt, p.pose_est, part) for p in pairs])
    return ErrorSeries(t, value, "ate")


def rpe_series(pairs, delta: int, part: str = "translation_only") -> ErrorSeries:
    """Per-sample relative-motion discrepancy over a fixed step of `delta` samples."""
    pairs = list(pairs)
    if delta < 1:
        raise ValueError("delta must be >= 1")
    if delta >= len(pairs):
        raise ValueError(f"delta {delta} >= number of pairs {len(pairs)}")
    t, value = [], []
    for i in range(len(pairs) - delta):
        a, b = pairs[i], pairs[i + delta]
        rel_gt = a.pose_gt.inverse().compose(b.pose_gt)
        rel_est = a.pose_est.inverse().compose(b.pose_est)
        value.append(_pair_error(rel_gt, rel_est, part))
        t.append(a.t)
    return ErrorSeries(np.array(t), np.array(value), "rpe")


def aggregate(series: ErrorSeries, mode: str = "rms") -> float:
    """Collapse an error series to a scalar.

    rms == sqrt(n) * paper_eq2 exactly (shared intermediate).
    """
    n = len(series)
    if n == 0:
        raise ValueError("cannot aggregate an empty series")
    root_sum = math.sqrt(float(np.sum(series.value**2)))
    eq2 = root_sum / n
    if mode == "paper_eq2":
        return eq2
    if mode == "rms":
        return math.sqrt(n) * eq2
    raise ValueError(f"unknown aggregation mode: {mode!r}")


def default_rpe_delta(pairs) -> int:
    """Sample step closest to one second of trajectory time."""
    t = np.array([p.t for p in pairs])
    if t.size < 2:
        return 1
    median_dt = float(np.median(np.diff(t)))
    if median_dt <= 0:
        return 1
    return max(1, round(1.0 / median_dt))


# ---------------------------------------------------------------------------
# velocities

def derive_velocities(traj: Trajectory, smoothing_halfwidth: int = 0) -> VelocitySeries:
    """Finite-difference velocities from a pose sequence.

    Central differences for interior samples, one-sided at the ends; angular
    velocity is body-frame, from the rotation log of relative rotations. A
    moving average over 2*halfwidth+1 samples (truncated at the edges) is
    applied when halfwidth > 0.
    """
    n = len(traj)
    if n < 3:
        raise ValueError("velocity derivation needs at least 3 samples")
    t = traj.t
    dt = np.diff(t)
    med = float(np.median(dt))
    if float(np.max(dt)) > 10.0 * med:
        warnings.warn(
            f"sample spacing varies by more than 10x the median ({med:.6g} s); "
            "derived velocities may be unreliable",
            IrregularSamplingWarning,
            stacklevel=2,
        )

    v = np.empty((n, 3))
    omega = np.empty((n, 3))
    rots = [Rotation(q) for q in traj.quats]

    def pair_rates(i, j):
        span = t[j] - t[i]
        lin = (traj.positions[j] - traj.positions[i]) / span
        ang = rots[i].inverse().compose(rots[j]).to_rotvec() / span
        return lin, ang

    v[0], omega[0] = pair_rates(0, 1)
    v[n - 1], omega[n - 1] = pair_rates(n - 2, n - 1)
    for i in range(1, n - 1):
        v[i], omega[i] = pair_rates(i - 1, i + 1)

    if smoothing_halfwidth > 0:
        v = _moving_average(v, smoothing_halfwidth)
        omega = _moving_average(omega, smoothing_halfwidth)
    return VelocitySeries(t, v, omega)


def _moving_average(arr: np.ndarray, halfwidth: int) -> np.ndarray:
    n = arr.shape[0]
    out = np.empty_like(arr)
    for i in range(n):
        lo = max(0, i - halfwidth)
        hi = min(n, i + halfwidth + 1)
        out[i] = arr[lo:hi].mean(axis=0)
    return out


def resample_velocities(series: VelocitySeries, t_grid) -> VelocitySeries:
    """Linear interpolation onto a new time grid inside the series' span."""
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.size == 0:
        raise ValueError("empty resampling grid")
    if t_grid[0] < series.t[0] or t_grid[-1] > series.t[-1]:
        raise ValueError("resampling grid extends outside the velocity span")
    v = np.column_stack([np.interp(t_grid, series.t, series.v[:, k]) for k in range(3)])
    omega = None
    if series.omega is not None:
        omega = np.column_stack(
            [np.interp(t_grid, series.t, series.omega[:, k]) for k in range(3)]
        )
    return VelocitySeries(t_grid, v, omega)


def overlap_grid(est_t: np.ndarray, gt_span: tuple[float, float]) -> np.ndarray:
    """Estimator timestamps restricted to the ground-truth span."""
    est_t = np.asarray(est_t, dtype=np.float64)
    keep = (est_t >= gt_span[0]) & (est_t <= gt_span[1])
    out = est_t[keep]
    if out.size == 0:
        raise ValueError("no temporal overlap between velocity series")
    return out


def transform_velocities(series: VelocitySeries, s: SimilarityTransform) -> VelocitySeries:
    """Rotate (and scale) world-frame linear velocities into the aligned frame.

    Body-frame angular velocity is invariant under a world-frame change.
    """
    rot = s.pose.rotation.matrix()
    return VelocitySeries(series.t, s.scale * series.v @ rot.T, series.omega)


@dataclass(frozen=True)
class VelocityErrors:
    ave: ErrorSeries
    rve: ErrorSeries
    excluded_low_speed: int
    rve_speeds: np.ndarray  # ground-truth speeds at the retained samples
    rve_omega: np.ndarray | None = field(default=None)


def rve_series(
    v_gt: VelocitySeries,
    v_est: VelocitySeries,
    speed_floor: float = DEFAULT_SPEED_FLOOR,
) -> VelocityErrors:
    """Absolute and relative linear-velocity errors on a shared time grid.

    The relative error divides by the ground-truth speed, so samples slower
    than speed_floor are excluded from the relative series (and counted).
    """
    if len(v_gt) != len(v_est) or not np.allclose(v_gt.t, v_est.t, atol=1e-9):
        raise ValueError("velocity series are not on the same time grid")
    if len(v_gt) == 0:
        raise ValueError("empty velocity overlap")
    ave_vals = np.linalg.norm(v_gt.v - v_est.v, axis=1)
    speeds = v_gt.speeds()
    keep = speeds >= speed_floor
    excluded = int(np.count_nonzero(~keep))
    ave = ErrorSeries(v_gt.t, ave_vals, "ave")
    rve = ErrorSeries(v_gt.t[keep], ave_vals[keep] / speeds[keep], "rve")
    omega = v_gt.omega[keep] if v_gt.omega is not None else None
    return VelocityErrors(ave, rve, excluded, speeds[keep], omega)


# ---------------------------------------------------------------------------
# weights, precision curve, AUC

def weights(v_gt, scheme: str = "velocity") -> np.ndarray:
    """Per-sample weights, normalized to sum to 1.

    uniform: 1/n. velocity: ||v_i|| / sum ||v_j||. combined:
    sqrt(||v_i||^2 + ||omega_i||^2) normalized the same way.
    """
    if isinstance(v_gt, VelocitySeries):
        speeds = v_gt.speeds()
        omega = v_gt.omega
    else:
        v_gt = list(v_gt)
        speeds = np.array([np.linalg.norm(s.v) for s in v_gt])
        omega = (
            np.array([s.omega for s in v_gt])
            if v_gt and v_gt[0].omega is not None
            else None
        )
    n = speeds.size
    if n == 0:
        raise ValueError("cannot weight an empty series")
    if scheme == "uniform":
        return np.full(n, 1.0 / n)
    if scheme == "velocity":
        mags = speeds
    elif scheme == "combined":
        if omega is None:
            raise ValueError("combined weighting requires angular velocities")
        mags = np.sqrt(speeds**2 + np.linalg.norm(omega, axis=1) ** 2)
    else:
        raise ValueError(f"unknown weight scheme: {scheme!r}")
    total = float(mags.sum())
    if total <= 0.0:
        raise ValueError(f"all motion magnitudes are zero under {scheme!r} weighting")
    return mags / total


def precision_curve(rve: ErrorSeries, w, xi_grid) -> PrecisionCurve:
    """S(xi) = sum_i w_i * 1(rve_i < xi), evaluated on the grid (strict <)."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != rve.value.shape:
        raise ValueError("weights and error series lengths differ")
    xi_grid = np.asarray(xi_grid, dtype=np.float64)
    order = np.argsort(rve.value, kind="stable")
    sorted_err = rve.value[order]
    cum_w = np.concatenate([[0.0], np.cumsum(w[order])])
    # strict inequality: weight of errors strictly below xi
    idx = np.searchsorted(sorted_err, xi_grid, side="left")
    return PrecisionCurve(xi_grid, cum_w[idx], "custom")


def precision_curve_for_scheme(
    errors: VelocityErrors, scheme: str, xi_grid=None
) -> PrecisionCurve:
    """Precision curve with weights computed from the retained ground-truth motion."""
    if xi_grid is None:
        xi_grid = default_xi_grid()
    if scheme == "uniform":
        w = np.full(len(errors.rve), 1.0 / max(len(errors.rve), 1))
    elif scheme == "velocity":
        total = float(errors.rve_speeds.sum())
        if total <= 0:
            raise ValueError("all retained speeds are zero")
        w = errors.rve_speeds / total
    elif scheme == "combined":
        if errors.rve_omega is None:
            raise ValueError("combined weighting requires angular velocities")
        mags = np.sqrt(
            errors.rve_speeds**2 + np.linalg.norm(errors.rve_omega, axis=1) ** 2
        )
        total = float(mags.sum())
        if total <= 0:
            raise ValueError("all retained motion magnitudes are zero")
        w = mags / total
    else:
        raise ValueError(f"unknown weight scheme: {scheme!r}")
    curve = precision_curve(errors.rve, w, xi_grid)
    return PrecisionCurve(curve.xi, curve.s, scheme)


def curve_auc(curve: PrecisionCurve, xi_max: float = DEFAULT_XI_MAX) -> float:
    """Trapezoidal integral of S over [0, xi_max], normalized by xi_max."""
    xi, s = curve.xi, curve.s
    if xi_max <= 0:
        raise ValueError("xi_max must be positive")
    if xi[0] > 0.0 or xi_max > xi[-1] + 1e-12:
        raise ValueError(f"curve grid [{xi[0]}, {xi[-1]}] does not cover [0, {xi_max}]")
    keep = xi <= xi_max
    xs = xi[keep]
    ys = s[keep]
    if xs[-1] < xi_max:  # close the interval at xi_max by interpolation
        xs = np.append(xs, xi_max)
        ys = np.append(ys, np.interp(xi_max, xi, s))
    lo = np.searchsorted(xs, 0.0, side="left")
    xs, ys = xs[lo:], ys[lo:]
    return float(np.trapezoid(ys, xs) / xi_max)


# ---------------------------------------------------------------------------
# per-sequence report payload

@dataclass(frozen=True)
class MetricReport:
    """Everything the evaluation run produced for one sequence; the stored
    series reproduce every scalar."""

    sequence: str
    alignment_mode: str
    alignment: SimilarityTransform
    ate: dict  # part -> {mode -> scalar}
    rpe: dict
    rpe_delta: int
    pair_count: int
    velocity: dict | None  # curves, aucs, exclusions, source
    series: dict  # name -> ErrorSeries
    notes: tuple[str, ...] = ()
