"""Dataset-quality analytics: stereo event-count consistency, time maps,
optical-flow difficulty, stereo depth-reliability bounds, and windowed event
counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import EventStream

STEREO_CONSISTENCY_LIMIT_PERCENT = 10.0
TIMEMAP_BACKGROUND = -np.inf


@dataclass(frozen=True)
class StereoCountReport:
    left_count: int
    right_count: int
    ratio_percent: float
    inconsistent: bool


def _count(stream_or_count) -> int:
    if isinstance(stream_or_count, EventStream):
        return len(stream_or_count)
    return int(stream_or_count)


def stereo_count_ratio(left, right) -> StereoCountReport:
    """Signed left/right count difference, 100*(L-R)/R.

    Differences above 10% in magnitude are flagged inconsistent; smaller
    imbalances are within what FOV and motion asymmetry explain.
    """
    left_count = _count(left)
    right_count = _count(right)
    if right_count <= 0:
        raise ValueError("right event count must be positive")
    ratio = 100.0 * (left_count - right_count) / right_count
    return StereoCountReport(
        left_count,
        right_count,
        ratio,
        abs(ratio) > STEREO_CONSISTENCY_LIMIT_PERCENT,
    )


@dataclass(frozen=True)
class TimeMap:
    """Per-pixel most-recent event timestamp (seconds) inside a window.

    Pixels that saw no event hold -inf. Raw timestamps are kept so the map is
    directly comparable against a per-pixel scan; normalization is only for
    rendering.
    """

    values: np.ndarray  # (height, width), seconds
    t0: float
    t1: float

    def valid(self) -> np.ndarray:
        return self.values != TIMEMAP_BACKGROUND

    def normalized(self) -> np.ndarray:
        """Window-relative values in [0, 1]; background pixels are 0."""
        out = np.zeros_like(self.values)
        m = self.valid()
        span = self.t1 - self.t0
        out[m] = (self.values[m] - self.t0) / span
        return out

    def to_uint16(self) -> np.ndarray:
        """PNG-ready grayscale: background 0, events scaled to 1..65535."""
        out = np.zeros(self.values.shape, dtype=np.uint16)
        m = self.valid()
        out[m] = np.round(1.0 + self.normalized()[m] * 65534.0).astype(np.uint16)
        return out

    def write_pgm(self, path: str) -> None:
        """16-bit binary PGM (big-endian sample order per the format)."""
        gray = self.to_uint16()
        h, w = gray.shape
        with open(path, "wb") as f:
            f.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
            f.write(gray.astype(">u2").tobytes())


def time_map(stream: EventStream, window: tuple[float, float]) -> TimeMap:
    """Latest event time per pixel over [t0, t1); empty pixels are background."""
    t0, t1 = float(window[0]), float(window[1])
    if not t0 < t1:
        raise ValueError("time window must satisfy t0 < t1")
    values = np.full((stream.height, stream.width), TIMEMAP_BACKGROUND)
    t_s = stream.t_seconds()
    keep = (t_s >= t0) & (t_s < t1)
    np.maximum.at(values, (stream.y[keep], stream.x[keep]), t_s[keep])
    return TimeMap(values, t0, t1)


@dataclass(frozen=True)
class FlowDifficulty:
    normalized_magnitudes: np.ndarray
    auc: float
    xi: np.ndarray
    survival: np.ndarray


def flow_difficulty(flow, width: int, height: int, xi_grid=None) -> FlowDifficulty:
    """Motion-agility score from optical-flow magnitudes.

    Magnitudes (from a (h, w, 2) field or a flat list) are normalized by the
    image diagonal; the score is the trapezoidal area under the survival
    function P(|f|/diag > xi) over the grid, normalized by the grid span.
    """
    if width <= 0 or height <= 0:
        raise ValueError("resolution must be positive")
    flow = np.asarray(flow, dtype=np.float64)
    if flow.ndim == 3 and flow.shape[-1] == 2:
        mags = np.linalg.norm(flow, axis=-1).ravel()
    elif flow.ndim == 1:
        mags = np.abs(flow)
    else:
        raise ValueError(f"flow must be (h, w, 2) or 1-d magnitudes, got {flow.shape}")
    if mags.size == 0:
        raise ValueError("empty flow input")
    diag = float(np.hypot(width, height))
    norm = mags / diag
    if xi_grid is None:
        xi_grid = np.linspace(0.0, 1.0, 256)
    xi = np.asarray(xi_grid, dtype=np.float64)
    sorted_norm = np.sort(norm)
    # survival: fraction strictly above each threshold
    survival = 1.0 - np.searchsorted(sorted_norm, xi, side="right") / norm.size
    span = float(xi[-1] - xi[0])
    auc = float(np.trapezoid(survival, xi) / span)
    return FlowDifficulty(norm, auc, xi, survival)


def max_reliable_depth(f_x: float, baseline: float, eps: float, du: float = 0.5) -> float:
    """Largest depth whose worst-case relative error stays within eps.

    With true disparity d and measured disparity d -/+ du, the worst branch is
    the under-measured one, du/(d - du); solving for error == eps gives
    d_min = du (1 + eps) / eps and depth f_x * baseline / d_min.
    """
    if f_x <= 0 or baseline <= 0:
        raise ValueError("focal length and baseline must be positive")
    if eps <= 0 or eps >= 1:
        raise ValueError("relative error bound must be in (0, 1)")
    if du <= 0:
        raise ValueError("disparity error must be positive")
    d_min = du * (1.0 + eps) / eps
    return f_x * baseline / d_min


def depth_relative_error(d: float, du: float) -> tuple[float, float]:
    """Relative depth error for disparity measured d-du (worst) and d+du."""
    if d <= du:
        raise ValueError("disparity must exceed the disparity error")
    return du / (d - du), du / (d + du)


@dataclass(frozen=True)
class WindowedCounts:
    counts: np.ndarray  # events per consecutive window
    window_s: float
    start_us: float
    last_partial: bool  # trailing window not fully covered by the stream span

    def __len__(self) -> int:
        return int(self.counts.size)


def windowed_event_counts(stream: EventStream, window: float) -> WindowedCounts:
    """Event counts over consecutive fixed-length windows spanning the stream.

    Windows are anchored at the first event; the trailing window is flagged
    when the stream span does not fill it.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    if len(stream) == 0:
        return WindowedCounts(np.zeros(0, dtype=np.int64), window, 0.0, False)
    t = np.asarray(stream.t, dtype=np.float64)
    window_us = window * 1e6
    t0 = float(t[0])
    span = float(t[-1]) - t0
    n_windows = int(span // window_us) + 1
    edges = t0 + np.arange(n_windows + 1) * window_us
    idx = np.searchsorted(edges, t, side="right") - 1
    counts = np.bincount(idx, minlength=n_windows).astype(np.int64)
    return WindowedCounts(counts, window, t0, span % window_us != 0.0)
