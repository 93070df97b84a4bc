"""File ingestion: TUM trajectories, event streams (CSV / packed binary),
velocity files, and marker-based clock mapping onto a common timeline.

Trajectory timestamps are double-precision seconds; event timestamps are
integer microseconds on the device clock (float microseconds once mapped to
the common timeline).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Pose, Rotation

EVB_MAGIC = b"EVB1"
EVENT_RECORD_DTYPE = np.dtype(
    [("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "<i1")]
)  # 13 bytes, little-endian

QUAT_UNIT_TOL = 1e-3


class ParseError(ValueError):
    """Malformed input file; message carries the 1-based line number when known."""


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    pose: Pose


@dataclass(frozen=True)
class Trajectory:
    """Timestamped pose sequence with strictly increasing timestamps.

    Stored as parallel arrays: t (n,) seconds, positions (n, 3) meters,
    quats (n, 4) in (w, x, y, z) order, normalized.
    """

    t: np.ndarray
    positions: np.ndarray
    quats: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        p = np.asarray(self.positions, dtype=np.float64)
        q = np.asarray(self.quats, dtype=np.float64)
        if not (t.ndim == 1 and p.shape == (t.size, 3) and q.shape == (t.size, 4)):
            raise ValueError("inconsistent trajectory array shapes")
        if t.size == 0:
            raise ValueError("empty trajectory")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("trajectory timestamps must be strictly increasing")
        norms = np.linalg.norm(q, axis=1)
        if np.any(norms < 1e-12):
            raise ValueError("zero quaternion in trajectory")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "quats", q / norms[:, None])

    def __len__(self) -> int:
        return int(self.t.size)

    def pose(self, i: int) -> Pose:
        return Pose(Rotation(self.quats[i]), self.positions[i])

    def sample(self, i: int) -> TrajectorySample:
        return TrajectorySample(float(self.t[i]), self.pose(i))

    def samples(self):
        for i in range(len(self)):
            yield self.sample(i)

    @staticmethod
    def from_samples(samples) -> "Trajectory":
        samples = list(samples)
        return Trajectory(
            np.array([s.t for s in samples]),
            np.array([s.pose.translation for s in samples]),
            np.array([s.pose.rotation.q for s in samples]),
        )

    def median_dt(self) -> float:
        if len(self) < 2:
            raise ValueError("need at least 2 samples for a sample spacing")
        return float(np.median(np.diff(self.t)))


@dataclass(frozen=True)
class Event:
    t: float  # microseconds
    x: int
    y: int
    polarity: int


@dataclass(frozen=True)
class EventStream:
    """Events in non-decreasing time order with sensor resolution metadata.

    t is int64 microseconds on the device clock, or float64 microseconds on
    the common timeline after clock mapping.
    """

    width: int
    height: int
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    polarity: np.ndarray
    camera_id: str = ""

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("stream resolution must be positive")
        t = np.asarray(self.t)
        x = np.asarray(self.x, dtype=np.int64)
        y = np.asarray(self.y, dtype=np.int64)
        p = np.asarray(self.polarity, dtype=np.int8)
        if not (t.shape == x.shape == y.shape == p.shape) or t.ndim != 1:
            raise ValueError("inconsistent event array shapes")
        if t.size:
            if np.any(np.diff(t) < 0):
                raise ValueError("event timestamps must be non-decreasing")
            if np.any((x < 0) | (x >= self.width) | (y < 0) | (y >= self.height)):
                raise ValueError("event coordinates outside declared resolution")
            if np.any((p != 1) & (p != -1)):
                raise ValueError("polarity must be +1 or -1")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "polarity", p)

    def __len__(self) -> int:
        return int(self.t.size)

    def event(self, i: int) -> Event:
        return Event(self.t[i].item(), int(self.x[i]), int(self.y[i]), int(self.polarity[i]))

    def t_seconds(self) -> np.ndarray:
        return np.asarray(self.t, dtype=np.float64) / 1e6


def _empty_stream(width, height, camera_id):
    z = np.zeros(0, dtype=np.int64)
    return EventStream(width, height, z, z, z, z.astype(np.int8), camera_id)


# ---------------------------------------------------------------------------
# trajectory text format (TUM: "t tx ty tz qx qy qz qw", '#' comments)

def parse_trajectory(text, format: str = "tum") -> Trajectory:
    if format != "tum":
        raise ValueError(f"unsupported trajectory format: {format!r}")
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if hasattr(text, "read"):
        text = text.read()

    ts, ps, qs = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 8:
            raise ParseError(f"line {lineno}: expected 8 fields, got {len(fields)}")
        try:
            vals = [float(f) for f in fields]
        except ValueError as e:
            raise ParseError(f"line {lineno}: {e}") from None
        t, tx, ty, tz, qx, qy, qz, qw = vals
        qn = (qw * qw + qx * qx + qy * qy + qz * qz) ** 0.5
        if abs(qn - 1.0) > QUAT_UNIT_TOL:
            raise ParseError(f"line {lineno}: quaternion norm {qn:.6f} deviates from 1")
        if ts and t == ts[-1]:
            raise ParseError(f"line {lineno}: duplicate timestamp {t!r}")
        if ts and t < ts[-1]:
            raise ParseError(
                f"line {lineno}: timestamps not increasing ({t!r} after {ts[-1]!r})"
            )
        ts.append(t)
        ps.append((tx, ty, tz))
        qs.append((qw, qx, qy, qz))  # file order is x y z w
    if not ts:
        raise ParseError("no trajectory samples found")
    return Trajectory(np.array(ts), np.array(ps), np.array(qs))


def serialize_trajectory(traj: Trajectory) -> str:
    lines = []
    for i in range(len(traj)):
        vals = [traj.t[i], *traj.positions[i], *traj.quats[i][[1, 2, 3, 0]]]
        lines.append(" ".join(repr(float(v)) for v in vals))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# velocity text format: "t vx vy vz [wx wy wz]", '#' comments

def parse_velocities(text):
    """Returns (t (n,), v (n,3), omega (n,3) or None). Used for --est-vel files."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if hasattr(text, "read"):
        text = text.read()
    ts, vs, ws = [], [], []
    n_fields = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) not in (4, 7):
            raise ParseError(f"line {lineno}: expected 4 or 7 fields, got {len(fields)}")
        if n_fields is None:
            n_fields = len(fields)
        elif len(fields) != n_fields:
            raise ParseError(f"line {lineno}: inconsistent field count")
        try:
            vals = [float(f) for f in fields]
        except ValueError as e:
            raise ParseError(f"line {lineno}: {e}") from None
        if ts and vals[0] <= ts[-1]:
            raise ParseError(f"line {lineno}: timestamps not strictly increasing")
        ts.append(vals[0])
        vs.append(vals[1:4])
        if n_fields == 7:
            ws.append(vals[4:7])
    if not ts:
        raise ParseError("no velocity samples found")
    omega = np.array(ws) if ws else None
    return np.array(ts), np.array(vs), omega


# ---------------------------------------------------------------------------
# event formats

def _map_polarity(p: np.ndarray) -> np.ndarray:
    """Accepts {1,-1} and {0,1} conventions; 0 maps to -1."""
    p = np.asarray(p)
    bad = (p != 1) & (p != -1) & (p != 0)
    if np.any(bad):
        raise ParseError(f"invalid polarity value {p[bad][0]}")
    out = np.where(p == 1, 1, -1).astype(np.int8)
    return out


def parse_events(
    data,
    format: str,
    width: int | None = None,
    height: int | None = None,
    camera_id: str = "",
) -> EventStream:
    """Parse an event stream from CSV text or EVB1 packed binary.

    CSV needs the sensor resolution passed in; the binary header carries it.
    """
    if format == "csv":
        if width is None or height is None:
            raise ValueError("csv event parsing requires width and height")
        return _parse_events_csv(data, width, height, camera_id)
    if format == "packed-binary":
        return _parse_events_binary(data, camera_id)
    raise ValueError(f"unsupported event format: {format!r}")


def _parse_events_csv(text, width, height, camera_id) -> EventStream:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    if hasattr(text, "read"):
        text = text.read()
    ts, xs, ys, ps = [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != 4:
            raise ParseError(f"line {lineno}: expected 4 comma-separated fields")
        try:
            t, x, y, p = (int(f) for f in fields)
        except ValueError:
            if lineno == 1:  # optional header
                continue
            raise ParseError(f"line {lineno}: non-integer event field") from None
        if not (0 <= x < width and 0 <= y < height):
            raise ParseError(
                f"line {lineno}: coordinate ({x}, {y}) outside {width}x{height}"
            )
        if ts and t < ts[-1]:
            raise ParseError(f"line {lineno}: decreasing timestamp {t}")
        ts.append(t)
        xs.append(x)
        ys.append(y)
        ps.append(p)
    if not ts:
        return _empty_stream(width, height, camera_id)
    return EventStream(
        width,
        height,
        np.array(ts, dtype=np.int64),
        np.array(xs, dtype=np.int64),
        np.array(ys, dtype=np.int64),
        _map_polarity(np.array(ps)),
        camera_id,
    )


def _parse_events_binary(data, camera_id) -> EventStream:
    if hasattr(data, "read"):
        data = data.read()
    if len(data) < 8:
        raise ParseError("binary event file shorter than header")
    if data[:4] != EVB_MAGIC:
        raise ParseError(f"bad magic {data[:4]!r}, expected {EVB_MAGIC!r}")
    width = int.from_bytes(data[4:6], "little")
    height = int.from_bytes(data[6:8], "little")
    body = data[8:]
    if len(body) % EVENT_RECORD_DTYPE.itemsize:
        raise ParseError("binary event payload is not a whole number of records")
    rec = np.frombuffer(body, dtype=EVENT_RECORD_DTYPE)
    if rec.size == 0:
        return _empty_stream(width, height, camera_id)
    t = rec["t"].astype(np.int64)
    if np.any(np.diff(t) < 0):
        raise ParseError("decreasing timestamp in binary event stream")
    x = rec["x"].astype(np.int64)
    y = rec["y"].astype(np.int64)
    if np.any((x >= width) | (y >= height)):
        raise ParseError(f"event coordinate outside {width}x{height}")
    return EventStream(width, height, t, x, y, _map_polarity(rec["p"]), camera_id)


def serialize_events_csv(stream: EventStream, header: bool = True) -> str:
    lines = ["t_us,x,y,polarity"] if header else []
    t = np.asarray(stream.t, dtype=np.int64)
    for i in range(len(stream)):
        lines.append(f"{t[i]},{stream.x[i]},{stream.y[i]},{stream.polarity[i]}")
    return "\n".join(lines) + "\n"


def serialize_events_binary(stream: EventStream) -> bytes:
    rec = np.empty(len(stream), dtype=EVENT_RECORD_DTYPE)
    rec["t"] = np.asarray(stream.t, dtype=np.int64).astype(np.uint64)
    rec["x"] = stream.x
    rec["y"] = stream.y
    rec["p"] = stream.polarity
    header = EVB_MAGIC + int(stream.width).to_bytes(2, "little") + int(
        stream.height
    ).to_bytes(2, "little")
    return header + rec.tobytes()


def load_events(path: str, width: int | None = None, height: int | None = None,
                camera_id: str = "") -> EventStream:
    """Dispatch on file content: EVB1 magic selects binary, otherwise CSV."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] == EVB_MAGIC:
        return parse_events(data, "packed-binary", camera_id=camera_id)
    return parse_events(data, "csv", width=width, height=height, camera_id=camera_id)


# ---------------------------------------------------------------------------
# clock synchronization

@dataclass(frozen=True)
class SyncMarker:
    pulse_index: int
    device_t: int  # microseconds


@dataclass(frozen=True)
class ClockMap:
    """Piecewise-linear device-time to common-time mapping, exact at anchors.

    Outside the anchor span the nearest segment is extrapolated.
    """

    device_us: np.ndarray
    common_s: np.ndarray
    common_us: np.ndarray = field(init=False)

    def __post_init__(self):
        d = np.asarray(self.device_us, dtype=np.float64)
        c = np.asarray(self.common_s, dtype=np.float64)
        if d.size != c.size or d.size < 2:
            raise ValueError("clock map needs at least 2 anchors")
        if np.any(np.diff(d) <= 0) or np.any(np.diff(c) <= 0):
            raise ValueError("clock map anchors must be strictly increasing")
        object.__setattr__(self, "device_us", d)
        object.__setattr__(self, "common_s", c)
        object.__setattr__(self, "common_us", c * 1e6)

    def map_us(self, t_us) -> np.ndarray:
        """Device microseconds -> common-timeline microseconds."""
        return _affine_interp(t_us, self.device_us, self.common_us)

    def map_seconds(self, t_s) -> np.ndarray:
        """Device seconds -> common-timeline seconds."""
        return _affine_interp(np.asarray(t_s, dtype=np.float64) * 1e6,
                              self.device_us, self.common_s)


def _affine_interp(x, xs, ys):
    x = np.asarray(x, dtype=np.float64)
    out = np.interp(x, xs, ys)
    left = x < xs[0]
    if np.any(left):
        slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
        out = np.where(left, ys[0] + (x - xs[0]) * slope, out)
    right = x > xs[-1]
    if np.any(right):
        slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        out = np.where(right, ys[-1] + (x - xs[-1]) * slope, out)
    return out


def build_clock_map(markers, pulse_hz: float, host_t0: float = 0.0) -> ClockMap:
    """Anchor marker k at host_t0 + pulse_index_k / pulse_hz on the common timeline."""
    markers = list(markers)
    if len(markers) < 2:
        raise ValueError("clock map needs at least 2 sync markers")
    if pulse_hz <= 0:
        raise ValueError("pulse rate must be positive")
    idx = np.array([m.pulse_index for m in markers], dtype=np.float64)
    dev = np.array([m.device_t for m in markers], dtype=np.float64)
    if np.any(np.diff(idx) <= 0) or np.any(np.diff(dev) <= 0):
        raise ValueError("sync markers must be strictly increasing in index and time")
    return ClockMap(dev, host_t0 + idx / pulse_hz)


def apply_clock_map(cmap: ClockMap, data):
    """Rebase a Trajectory (seconds) or EventStream (microseconds) onto the
    common timeline; sample order is preserved."""
    if isinstance(data, Trajectory):
        return Trajectory(cmap.map_seconds(data.t), data.positions, data.quats)
    if isinstance(data, EventStream):
        return replace(data, t=cmap.map_us(np.asarray(data.t, dtype=np.float64)))
    raise TypeError(f"cannot clock-map {type(data).__name__}")
