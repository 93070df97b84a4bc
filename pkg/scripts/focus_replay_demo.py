#!/usr/bin/env python3
"""Headless focus-assistant demo.

Synthesizes a stereo event-rate step stream (1 kHz -> 5 kHz at t=5 s, right
camera slightly dimmer), replays it through the sliding-window monitor, and
prints one line per snapshot so the peak tracking and the in-focus flag can be
inspected without the dashboard.

Usage: python scripts/focus_replay_demo.py
"""

from evbench.focus import FocusConfig, replay_snapshots
from evbench.synth import synth_event_rate_stream


def run() -> None:
    left = synth_event_rate_stream(
        [(0.0, 1000.0), (5.0, 5000.0), (10.0, 0.0)], (640, 480), seed=1,
        camera_id="left",
    )
    right = synth_event_rate_stream(
        [(0.0, 950.0), (5.0, 4800.0), (10.0, 0.0)], (640, 480), seed=2,
        camera_id="right",
    )
    cfg = FocusConfig(window_s=0.1, cadence_hz=10.0)
    print(f"{'t':>6} {'left':>8} {'right':>8} {'ratio%':>8} "
          f"{'peakL':>8} {'peakR':>8}  focus")
    for snap in replay_snapshots(left, right, cfg):
        ratio = "n/a" if snap.ratio_percent is None else f"{snap.ratio_percent:8.2f}"
        print(
            f"{snap.t:6.2f} {snap.left_rate:8.0f} {snap.right_rate:8.0f} "
            f"{ratio:>8} {snap.left_peak:8.0f} {snap.right_peak:8.0f}  "
            f"{'IN-FOCUS' if snap.in_focus else '-'}"
        )


if __name__ == "__main__":
    run()
