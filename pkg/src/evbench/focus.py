"""Live lens-focusing assistant backend.

Maintains per-camera sliding windows of event timestamps, tracks session peak
rates, and reports snapshots of left/right rates, their imbalance, and an
advisory in-focus flag. The operator turns the focus rings until both rates
peak and match; peaks are kept for the whole session (focus sweeps overshoot,
so the historical maximum is what the operator needs to see) until an explicit
reset.

Two ingestion producers (one per camera) and one snapshot consumer are
supported concurrently: a single short-held lock guards window state, and
snapshot emission happens outside it, so producers never wait on the network.
"""

from __future__ import annotations

import asyncio
import json
import threading
import time
from collections import deque
from contextlib import asynccontextmanager
from dataclasses import asdict, dataclass, field

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .ingest import EVB_MAGIC, EVENT_RECORD_DTYPE, EventStream

CAMERAS = ("left", "right")


@dataclass(frozen=True)
class StimulusSettings:
    """Calibration pattern the dashboard renders; served verbatim via /config."""

    kind: str = "checkerboard_flicker"  # or "rotating_line"
    frequency: float = 5.0  # Hz flicker cycles, or rad/s line rotation
    grid_size: int = 8
    contrast: float = 1.0


@dataclass(frozen=True)
class FocusConfig:
    window_s: float = 0.1
    cadence_hz: float = 10.0
    peak_fraction: float = 0.9  # "at maximum" when rate >= fraction * peak
    ratio_limit_percent: float = 10.0  # "closely matched" bound
    stimulus: StimulusSettings = field(default_factory=StimulusSettings)


@dataclass(frozen=True)
class FocusSnapshot:
    t: float
    left_rate: float
    right_rate: float
    ratio_percent: float | None  # None when the right window is empty
    left_peak: float
    right_peak: float
    in_focus: bool
    window: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


class FocusMonitor:
    """Sliding-window event-rate tracker over the data clock.

    Rates are counts over [now - window, now) divided by the window length,
    where `now` is the latest event timestamp seen (or an explicit snapshot
    time). Peaks are maxima of emitted rates since the last reset.
    """

    def __init__(self, config: FocusConfig | None = None):
        self.config = config or FocusConfig()
        self._lock = threading.Lock()
        self._windows: dict[str, deque] = {c: deque() for c in CAMERAS}
        self._last_t: dict[str, float] = {c: -np.inf for c in CAMERAS}
        self._peaks: dict[str, float] = {c: 0.0 for c in CAMERAS}
        self._now = -np.inf  # latest event time seen, seconds
        self._last_snapshot_t = -np.inf

    def ingest_batch(self, camera: str, t_us) -> int:
        """Append a batch of event timestamps (device microseconds) for one camera.

        The batch must be non-decreasing and not precede earlier ingests for
        the same camera; otherwise it is rejected whole.
        """
        if camera not in CAMERAS:
            raise ValueError(f"unknown camera: {camera!r}")
        t_us = np.asarray(t_us, dtype=np.float64)
        if t_us.size == 0:
            return 0
        if np.any(np.diff(t_us) < 0):
            raise ValueError("batch rejected: decreasing timestamps")
        t_s = t_us / 1e6
        with self._lock:
            if t_s[0] < self._last_t[camera]:
                raise ValueError(
                    "batch rejected: starts before previously ingested events"
                )
            window = self._windows[camera]
            window.extend(t_s.tolist())
            self._last_t[camera] = t_s[-1]
            self._now = max(self._now, t_s[-1])
            self._evict(camera, self._now)
            return int(t_us.size)

    def _evict(self, camera: str, now: float) -> None:
        horizon = now - self.config.window_s
        window = self._windows[camera]
        while window and window[0] < horizon:
            window.popleft()

    def snapshot(self, at: float | None = None) -> FocusSnapshot:
        """Consistent view of both cameras; updates session peaks.

        `at` defaults to the latest event time seen; rates count events in
        [at - window, at).
        """
        cfg = self.config
        with self._lock:
            now = self._now if at is None else float(at)
            rates = {}
            for cam in CAMERAS:
                if now == -np.inf:
                    rates[cam] = 0.0
                    continue
                self._evict(cam, now)
                lo = now - cfg.window_s
                count = sum(1 for t in self._windows[cam] if lo <= t < now)
                rates[cam] = count / cfg.window_s
            for cam in CAMERAS:
                self._peaks[cam] = max(self._peaks[cam], rates[cam])
            peaks = dict(self._peaks)
            snap_t = now if now != -np.inf else 0.0

        left, right = rates["left"], rates["right"]
        ratio = None if right == 0.0 else 100.0 * (left - right) / right
        in_focus = (
            peaks["left"] > 0.0
            and peaks["right"] > 0.0
            and left >= cfg.peak_fraction * peaks["left"]
            and right >= cfg.peak_fraction * peaks["right"]
            and ratio is not None
            and abs(ratio) <= cfg.ratio_limit_percent
        )
        return FocusSnapshot(
            snap_t, left, right, ratio, peaks["left"], peaks["right"],
            in_focus, cfg.window_s,
        )

    def reset_peaks(self) -> None:
        with self._lock:
            for cam in CAMERAS:
                self._peaks[cam] = 0.0


# ---------------------------------------------------------------------------
# replay and streaming ingestion

class BinaryEventReader:
    """Incremental reader for the packed-binary event format, usable on
    growing files or FIFOs."""

    def __init__(self, fileobj):
        self._f = fileobj
        self._buffer = b""
        header = self._read_exact(8)
        if header[:4] != EVB_MAGIC:
            raise ValueError(f"bad magic {header[:4]!r}")
        self.width = int.from_bytes(header[4:6], "little")
        self.height = int.from_bytes(header[6:8], "little")

    def _read_exact(self, n: int) -> bytes:
        data = self._f.read(n)
        if len(data) != n:
            raise ValueError("truncated event stream header")
        return data

    def read_batch(self, max_events: int = 4096) -> np.ndarray | None:
        """Next batch of records, or None at end of stream."""
        want = max_events * EVENT_RECORD_DTYPE.itemsize - len(self._buffer)
        chunk = self._f.read(max(want, 0))
        data = self._buffer + chunk
        if not data:
            return None
        usable = len(data) - len(data) % EVENT_RECORD_DTYPE.itemsize
        self._buffer = data[usable:]
        if usable == 0:
            return None if not chunk else np.empty(0, dtype=EVENT_RECORD_DTYPE)
        return np.frombuffer(data[:usable], dtype=EVENT_RECORD_DTYPE)


def replay_snapshots(
    left: EventStream,
    right: EventStream,
    config: FocusConfig | None = None,
    monitor: FocusMonitor | None = None,
):
    """Headless replay: feed both streams in data-time order and emit one
    snapshot per cadence tick. Yields FocusSnapshot objects."""
    monitor = monitor or FocusMonitor(config)
    cfg = monitor.config
    streams = {
        "left": np.asarray(left.t, dtype=np.float64),
        "right": np.asarray(right.t, dtype=np.float64),
    }
    starts = [s[0] for s in streams.values() if s.size]
    ends = [s[-1] for s in streams.values() if s.size]
    if not starts:
        return
    t_start = min(starts) / 1e6
    t_end = max(ends) / 1e6
    tick = 1.0 / cfg.cadence_hz
    cursor = {cam: 0 for cam in CAMERAS}
    n_ticks = int((t_end - t_start) / tick) + 1
    for k in range(1, n_ticks + 1):
        t_snap = t_start + k * tick
        for cam in CAMERAS:
            t_arr = streams[cam]
            hi = int(np.searchsorted(t_arr, t_snap * 1e6, side="left"))
            if hi > cursor[cam]:
                monitor.ingest_batch(cam, t_arr[cursor[cam]:hi])
                cursor[cam] = hi
        yield monitor.snapshot(at=t_snap)


# ---------------------------------------------------------------------------
# HTTP / WebSocket service

def create_app(monitor: FocusMonitor, replay=None):
    """FastAPI app exposing /ws/focus, POST /reset-peaks, and GET /config.

    `replay` is an optional (left, right) EventStream pair fed in wall-clock
    pacing while the app runs.
    """

    @asynccontextmanager
    async def lifespan(app):
        if replay is not None:
            left, right = replay
            threading.Thread(
                target=_paced_replay, args=(monitor, left, right), daemon=True
            ).start()
        yield

    app = FastAPI(title="evbench focus service", lifespan=lifespan)
    cfg = monitor.config

    @app.get("/config")
    def get_config():
        return {
            "window": cfg.window_s,
            "cadence_hz": cfg.cadence_hz,
            "peak_fraction": cfg.peak_fraction,
            "ratio_limit_percent": cfg.ratio_limit_percent,
            "stimulus": asdict(cfg.stimulus),
        }

    @app.post("/reset-peaks")
    def reset_peaks():
        monitor.reset_peaks()
        return {"ok": True}

    @app.websocket("/ws/focus")
    async def ws_focus(ws: WebSocket):
        await ws.accept()
        try:
            while True:
                snap = monitor.snapshot()
                await ws.send_text(snap.to_json())
                await asyncio.sleep(1.0 / cfg.cadence_hz)
        except WebSocketDisconnect:
            pass

    return app


def _paced_replay(monitor: FocusMonitor, left: EventStream, right: EventStream,
                  chunk_s: float = 0.02):
    """Feed both streams into the monitor, pacing data time by the wall clock."""
    streams = {
        "left": np.asarray(left.t, dtype=np.float64),
        "right": np.asarray(right.t, dtype=np.float64),
    }
    starts = [s[0] for s in streams.values() if s.size]
    if not starts:
        return
    t_start = min(starts) / 1e6
    cursor = {cam: 0 for cam in CAMERAS}
    wall_start = time.monotonic()
    while any(cursor[cam] < streams[cam].size for cam in CAMERAS):
        elapsed = time.monotonic() - wall_start
        t_data = (t_start + elapsed) * 1e6
        for cam in CAMERAS:
            t_arr = streams[cam]
            hi = int(np.searchsorted(t_arr, t_data, side="left"))
            if hi > cursor[cam]:
                monitor.ingest_batch(cam, t_arr[cursor[cam]:hi])
                cursor[cam] = hi
        time.sleep(chunk_s)


def feed_stream(monitor: FocusMonitor, camera: str, fileobj,
                batch_events: int = 4096) -> int:
    """Drain a packed-binary event stream (file or FIFO) into the monitor."""
    reader = BinaryEventReader(fileobj)
    total = 0
    while True:
        batch = reader.read_batch(batch_events)
        if batch is None:
            return total
        if batch.size:
            total += monitor.ingest_batch(camera, batch["t"].astype(np.float64))
        else:
            time.sleep(0.005)  # partial record: the stream is still growing
