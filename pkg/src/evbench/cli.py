"""Command-line entry point.

Subcommands: evaluate, diagnose, depth-bound, flow-difficulty, synth,
focus serve, focus replay. Exit codes: 2 missing input file, 3 no temporal
overlap, 1 other errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

import numpy as np

from . import alignment as al
from . import diagnostics as dg
from . import metrics as mx
from . import plots, report, synth
from .focus import FocusConfig, FocusMonitor, create_app, replay_snapshots
from .ingest import (
    ParseError,
    load_events,
    parse_trajectory,
    parse_velocities,
    serialize_events_binary,
    serialize_trajectory,
)

EXIT_BAD_INPUT = 2
EXIT_NO_OVERLAP = 3


class CliError(Exception):
    def __init__(self, message, code=1):
        super().__init__(message)
        self.code = code


def _read_text(path: str) -> str:
    if not os.path.exists(path):
        raise CliError(f"input file not found: {path}", EXIT_BAD_INPUT)
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _require_file(path: str) -> str:
    if not os.path.exists(path):
        raise CliError(f"input file not found: {path}", EXIT_BAD_INPUT)
    return path


# ---------------------------------------------------------------------------
# evaluate

def _load_est_velocities(args, est_aligned, sim, notes):
    if args.est_vel:
        t, v, omega = parse_velocities(_read_text(args.est_vel))
        series = mx.VelocitySeries(t, v, omega)
        series = mx.transform_velocities(series, sim)
        source = "file"
    else:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            series = mx.derive_velocities(est_aligned, args.vel_smoothing)
        notes.extend(str(w.message) for w in caught)
        source = "derived_from_poses"
    return series, source


def cmd_evaluate(args) -> int:
    gt = parse_trajectory(_read_text(args.gt))
    est = parse_trajectory(_read_text(args.est))
    if len(gt) < 3 or len(est) < 3:
        raise CliError("need at least 3 samples in both trajectories", EXIT_BAD_INPUT)

    max_dt = args.max_dt if args.max_dt is not None else al.default_max_dt(gt)
    try:
        pairs = al.associate(est, gt, max_dt, mode=args.assoc_mode)
    except ValueError as e:
        raise CliError(str(e), EXIT_NO_OVERLAP) from None
    if len(pairs) < 3:
        raise CliError("fewer than 3 associated pairs", EXIT_NO_OVERLAP)

    notes: list[str] = []
    if args.align == "none":
        sim = al.SimilarityTransform.identity()
        residual = None
    else:
        try:
            sim = al.umeyama_align(pairs, with_scale=(args.align == "sim3"))
        except al.DegenerateGeometryError as e:
            raise CliError(f"{e}; rerun with --align none") from None
        residual = al.alignment_residual(pairs, sim)
    est_aligned = al.transform_trajectory(est, sim)
    pairs = [
        al.AssociatedPair(p.t, p.pose_gt, sim.apply_pose(p.pose_est)) for p in pairs
    ]

    ate = {
        part: dict(
            zip(
                mx.AGGREGATION_MODES,
                (
                    mx.aggregate(mx.ate_series(pairs, part), m)
                    for m in mx.AGGREGATION_MODES
                ),
            )
        )
        for part in mx.ATE_PARTS
    }
    delta = args.rpe_delta if args.rpe_delta is not None else mx.default_rpe_delta(pairs)
    delta = min(delta, len(pairs) - 1)
    rpe = {
        part: {m: mx.aggregate(mx.rpe_series(pairs, delta, part), m)
               for m in mx.AGGREGATION_MODES}
        for part in mx.ATE_PARTS
    }

    series = {
        "ate_translation": mx.ate_series(pairs, "translation_only"),
        "ate_full_se3": mx.ate_series(pairs, "full_se3"),
        "rpe_translation": mx.rpe_series(pairs, delta, "translation_only"),
    }

    velocity_section = None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        gt_vel = mx.derive_velocities(gt, args.vel_smoothing)
    notes.extend(str(w.message) for w in caught)
    est_vel, vel_source = _load_est_velocities(args, est_aligned, sim, notes)
    try:
        grid = mx.overlap_grid(est_vel.t, (float(gt_vel.t[0]), float(gt_vel.t[-1])))
    except ValueError as e:
        raise CliError(str(e), EXIT_NO_OVERLAP) from None
    gt_on_grid = mx.resample_velocities(gt_vel, grid)
    est_on_grid = mx.resample_velocities(est_vel, grid)
    errors = mx.rve_series(gt_on_grid, est_on_grid, args.speed_floor)
    xi_grid = mx.default_xi_grid(args.xi_max, args.xi_points)
    curves = {}
    for scheme in mx.WEIGHT_SCHEMES:
        if scheme == "combined" and errors.rve_omega is None:
            continue
        curve = mx.precision_curve_for_scheme(errors, scheme, xi_grid)
        curves[scheme] = report._curve_payload(curve, mx.curve_auc(curve, args.xi_max))
    velocity_section = {
        "source_est": vel_source,
        "speed_floor": args.speed_floor,
        "samples": len(errors.ave),
        "excluded_low_speed": errors.excluded_low_speed,
        "ave": {m: mx.aggregate(errors.ave, m) for m in mx.AGGREGATION_MODES},
        "rve_mean": float(np.mean(errors.rve.value)) if len(errors.rve) else None,
        "rve_median": float(np.median(errors.rve.value)) if len(errors.rve) else None,
        "headline_weighting": args.weights,
        "curves": curves,
    }
    series["ave"] = errors.ave
    series["rve"] = errors.rve

    mreport = mx.MetricReport(
        sequence=args.sequence or os.path.basename(args.est),
        alignment_mode=args.align,
        alignment=sim,
        ate=ate,
        rpe=rpe,
        rpe_delta=delta,
        pair_count=len(pairs),
        velocity=velocity_section,
        series=series,
        notes=tuple(notes),
    )
    config = {
        "subcommand": "evaluate",
        "gt": args.gt,
        "est": args.est,
        "est_vel": args.est_vel,
        "align": args.align,
        "agg": args.agg,
        "weights": args.weights,
        "assoc_mode": args.assoc_mode,
        "max_dt": max_dt,
        "rpe_delta": delta,
        "xi_max": args.xi_max,
        "xi_points": args.xi_points,
        "speed_floor": args.speed_floor,
        "vel_smoothing": args.vel_smoothing,
        "seed": args.seed,
        "out": args.out,
        "svg": args.svg,
    }
    doc = report.evaluation_document(mreport, config, residual)
    _emit(doc, args.out)

    if args.svg:
        base = os.path.splitext(args.out or "evaluation")[0]
        if velocity_section and velocity_section["curves"]:
            with open(base + "_curves.svg", "w") as f:
                f.write(plots.svg_precision_curves(velocity_section["curves"]))
        with open(base + "_errors.svg", "w") as f:
            f.write(plots.svg_error_series(doc["series"]))
    return 0


# ---------------------------------------------------------------------------
# diagnose and friends

def cmd_diagnose(args) -> int:
    sections: dict = {}
    streams = {}
    for side, path in (("left", args.left), ("right", args.right)):
        if path:
            streams[side] = load_events(
                _require_file(path), args.width, args.height, camera_id=side
            )
    if not streams:
        raise CliError("diagnose needs --left and/or --right event files", EXIT_BAD_INPUT)

    if len(streams) == 2:
        rep = dg.stereo_count_ratio(streams["left"], streams["right"])
        sections["stereo"] = {
            "left_count": rep.left_count,
            "right_count": rep.right_count,
            "ratio_percent": rep.ratio_percent,
            "inconsistent": rep.inconsistent,
        }

    sections["windowed_counts"] = {}
    for side, stream in streams.items():
        wc = dg.windowed_event_counts(stream, args.count_window)
        sections["windowed_counts"][side] = {
            "window_s": wc.window_s,
            "counts": wc.counts.tolist(),
            "last_partial": wc.last_partial,
        }

    if args.timemap_dir:
        os.makedirs(args.timemap_dir, exist_ok=True)
        sections["time_maps"] = {}
        for side, stream in streams.items():
            t_s = stream.t_seconds()
            if len(stream) == 0:
                continue
            window = (float(t_s[0]), float(t_s[-1]) + 1e-6)
            tm = dg.time_map(stream, window)
            path = os.path.join(args.timemap_dir, f"timemap_{side}.pgm")
            tm.write_pgm(path)
            sections["time_maps"][side] = {"path": path, "window": list(window)}

    if args.fx is not None:
        sections["depth_bounds"] = _depth_table(args.fx, args.baselines, args.eps, args.du)

    config = {
        "subcommand": "diagnose",
        "left": args.left,
        "right": args.right,
        "width": args.width,
        "height": args.height,
        "count_window": args.count_window,
        "fx": args.fx,
        "baselines": args.baselines,
        "eps": args.eps,
        "du": args.du,
        "seed": args.seed,
    }
    _emit(report.diagnostics_document(config, sections), args.out)
    return 0


def _depth_table(fx, baselines, eps, du):
    return [
        {
            "f_x": fx,
            "baseline": b,
            "eps": eps,
            "du": du,
            "max_depth_m": dg.max_reliable_depth(fx, b, eps, du),
        }
        for b in baselines
    ]


def cmd_depth_bound(args) -> int:
    doc = report.diagnostics_document(
        {
            "subcommand": "depth-bound",
            "fx": args.fx,
            "baselines": args.baselines,
            "eps": args.eps,
            "du": args.du,
        },
        {"depth_bounds": _depth_table(args.fx, args.baselines, args.eps, args.du)},
    )
    _emit(doc, args.out)
    return 0


def cmd_flow_difficulty(args) -> int:
    path = _require_file(args.flow)
    if path.endswith(".npy"):
        flow = np.load(path)
    else:
        flow = np.loadtxt(path, ndmin=1)
    fd = dg.flow_difficulty(flow, args.width, args.height)
    doc = report.diagnostics_document(
        {
            "subcommand": "flow-difficulty",
            "flow": args.flow,
            "width": args.width,
            "height": args.height,
        },
        {
            "flow_difficulty": {
                "auc": fd.auc,
                "xi": fd.xi.tolist(),
                "survival": fd.survival.tolist(),
                "samples": int(fd.normalized_magnitudes.size),
            }
        },
    )
    _emit(doc, args.out)
    return 0


# ---------------------------------------------------------------------------
# synth

def cmd_synth(args) -> int:
    wrote = []
    if args.pattern:
        pattern = synth.MotionPattern(
            kind=args.pattern,
            duration=args.duration,
            sample_hz=args.hz,
            radius=args.radius,
            rate=args.rate,
            speed=args.speed,
            spin_rate=args.spin_rate,
        )
        traj, vel = synth.synth_trajectory(pattern)
        if args.out_gt:
            with open(args.out_gt, "w") as f:
                f.write(serialize_trajectory(traj))
            wrote.append(args.out_gt)
        if args.out_est:
            noisy = synth.perturb_trajectory(
                traj,
                synth.NoiseModel(args.pos_sigma, args.rot_sigma, args.seed),
            )
            with open(args.out_est, "w") as f:
                f.write(serialize_trajectory(noisy))
            wrote.append(args.out_est)
        if args.out_vel:
            with open(args.out_vel, "w") as f:
                f.write("# t vx vy vz wx wy wz\n")
                for i in range(len(vel)):
                    vals = [vel.t[i], *vel.v[i], *vel.omega[i]]
                    f.write(" ".join(repr(float(x)) for x in vals) + "\n")
            wrote.append(args.out_vel)
    if args.events_profile:
        profile = _parse_profile(args.events_profile)
        stream = synth.synth_event_rate_stream(
            profile, (args.width, args.height), seed=args.seed
        )
        if not args.events_out:
            raise CliError("--events-profile requires --events-out")
        with open(args.events_out, "wb") as f:
            f.write(serialize_events_binary(stream))
        wrote.append(args.events_out)
    if not wrote:
        raise CliError("synth: nothing to do (need --pattern or --events-profile)")
    for path in wrote:
        print(path)
    return 0


def _parse_profile(spec: str):
    try:
        return [
            (float(pair.split(":")[0]), float(pair.split(":")[1]))
            for pair in spec.split(",")
        ]
    except (ValueError, IndexError):
        raise CliError(
            f"bad profile {spec!r}; expected t0:rate0,t1:rate1,..."
        ) from None


# ---------------------------------------------------------------------------
# focus

def _focus_config(args) -> FocusConfig:
    return FocusConfig(window_s=args.window, cadence_hz=args.cadence)


def cmd_focus_serve(args) -> int:
    import threading

    import uvicorn

    from .focus import feed_stream

    monitor = FocusMonitor(_focus_config(args))
    replay = None
    if args.replay_left or args.replay_right:
        if not (args.replay_left and args.replay_right):
            raise CliError("replay needs both --replay-left and --replay-right", EXIT_BAD_INPUT)
        replay = (
            load_events(_require_file(args.replay_left), camera_id="left"),
            load_events(_require_file(args.replay_right), camera_id="right"),
        )
    if args.live_left or args.live_right:
        if replay is not None:
            raise CliError("choose either live or replay inputs, not both")
        for camera, path in (("left", args.live_left), ("right", args.live_right)):
            if not path:
                continue
            fileobj = open(path, "rb")  # regular file, FIFO, or socket path
            threading.Thread(
                target=feed_stream, args=(monitor, camera, fileobj), daemon=True
            ).start()
    app = create_app(monitor, replay=replay)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_focus_replay(args) -> int:
    left = load_events(_require_file(args.left), camera_id="left")
    right = load_events(_require_file(args.right), camera_id="right")
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for snap in replay_snapshots(left, right, _focus_config(args)):
            out.write(snap.to_json() + "\n")
    finally:
        if args.out:
            out.close()
    return 0


# ---------------------------------------------------------------------------
# wiring

def _emit(doc: dict, out: str | None) -> None:
    if out:
        report.write(doc, out)
    else:
        sys.stdout.write(report.dumps(doc))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="evbench",
        description="Event-camera state-estimation benchmark evaluation and "
        "dataset diagnostics",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="score an estimated trajectory against ground truth")
    ev.add_argument("--gt", required=True, help="ground-truth trajectory (TUM format)")
    ev.add_argument("--est", required=True, help="estimated trajectory (TUM format)")
    ev.add_argument("--est-vel", help="estimated velocities (t vx vy vz [wx wy wz])")
    ev.add_argument("--align", choices=("se3", "sim3", "none"), default="se3")
    ev.add_argument("--agg", choices=("rms", "paper-eq2"), default="rms")
    ev.add_argument("--weights", choices=mx.WEIGHT_SCHEMES, default="velocity")
    ev.add_argument("--assoc-mode", choices=("nearest", "interpolate"), default="interpolate")
    ev.add_argument("--max-dt", type=float, default=None,
                    help="association tolerance (default: 1.5x median gt spacing)")
    ev.add_argument("--rpe-delta", type=int, default=None,
                    help="RPE step in samples (default: about 1 second)")
    ev.add_argument("--xi-max", type=float, default=mx.DEFAULT_XI_MAX)
    ev.add_argument("--xi-points", type=int, default=mx.DEFAULT_XI_GRID_POINTS)
    ev.add_argument("--speed-floor", type=float, default=mx.DEFAULT_SPEED_FLOOR)
    ev.add_argument("--vel-smoothing", type=int, default=0,
                    help="moving-average halfwidth for derived velocities")
    ev.add_argument("--sequence", help="sequence id recorded in the report")
    ev.add_argument("--out", help="report JSON path (default: stdout)")
    ev.add_argument("--svg", action="store_true", help="also write SVG plots")
    ev.add_argument("--seed", type=int, default=0)
    ev.set_defaults(func=cmd_evaluate)

    di = sub.add_parser("diagnose", help="dataset-quality diagnostics on event streams")
    di.add_argument("--left", help="left event stream (csv or EVB1 binary)")
    di.add_argument("--right", help="right event stream")
    di.add_argument("--width", type=int, default=640)
    di.add_argument("--height", type=int, default=480)
    di.add_argument("--count-window", type=float, default=5.0,
                    help="windowed-count interval, seconds")
    di.add_argument("--timemap-dir", help="write 16-bit PGM time maps here")
    di.add_argument("--fx", type=float, help="focal length for depth bounds, px")
    di.add_argument("--baselines", type=float, nargs="+", default=[0.10],
                    help="stereo baselines, meters")
    di.add_argument("--eps", type=float, default=0.15)
    di.add_argument("--du", type=float, default=0.5)
    di.add_argument("--out", help="report JSON path (default: stdout)")
    di.add_argument("--seed", type=int, default=0)
    di.set_defaults(func=cmd_diagnose)

    db = sub.add_parser("depth-bound", help="max reliable stereo depth table")
    db.add_argument("--fx", type=float, required=True)
    db.add_argument("--baselines", type=float, nargs="+", required=True)
    db.add_argument("--eps", type=float, default=0.15)
    db.add_argument("--du", type=float, default=0.5)
    db.add_argument("--out")
    db.set_defaults(func=cmd_depth_bound)

    fl = sub.add_parser("flow-difficulty", help="optical-flow difficulty score")
    fl.add_argument("--flow", required=True,
                    help=".npy (h,w,2) field in px/s, or text magnitudes")
    fl.add_argument("--width", type=int, required=True)
    fl.add_argument("--height", type=int, required=True)
    fl.add_argument("--out")
    fl.set_defaults(func=cmd_flow_difficulty)

    sy = sub.add_parser("synth", help="generate synthetic fixtures")
    sy.add_argument("--pattern", choices=synth.PATTERN_KINDS)
    sy.add_argument("--duration", type=float, default=10.0)
    sy.add_argument("--hz", type=float, default=120.0)
    sy.add_argument("--radius", type=float, default=2.0)
    sy.add_argument("--rate", type=float, default=1.0)
    sy.add_argument("--speed", type=float, default=1.0)
    sy.add_argument("--spin-rate", type=float, default=0.0)
    sy.add_argument("--pos-sigma", type=float, default=0.0)
    sy.add_argument("--rot-sigma", type=float, default=0.0)
    sy.add_argument("--out-gt", help="ground-truth trajectory output (TUM)")
    sy.add_argument("--out-est", help="perturbed trajectory output (TUM)")
    sy.add_argument("--out-vel", help="analytic velocity output")
    sy.add_argument("--events-profile",
                    help="piecewise event-rate profile t0:rate0,t1:rate1,...")
    sy.add_argument("--events-out", help="EVB1 binary event output")
    sy.add_argument("--width", type=int, default=640)
    sy.add_argument("--height", type=int, default=480)
    sy.add_argument("--seed", type=int, default=0)
    sy.set_defaults(func=cmd_synth)

    fo = sub.add_parser("focus", help="lens-focus assistant service")
    fosub = fo.add_subparsers(dest="focus_command", required=True)

    fs = fosub.add_parser("serve", help="host the focus WebSocket/HTTP service")
    fs.add_argument("--host", default="127.0.0.1")
    fs.add_argument("--port", type=int, default=8000)
    fs.add_argument("--window", type=float, default=0.1)
    fs.add_argument("--cadence", type=float, default=10.0)
    fs.add_argument("--replay-left", help="EVB1 file replayed as the left camera")
    fs.add_argument("--replay-right", help="EVB1 file replayed as the right camera")
    fs.add_argument("--live-left", help="EVB1 stream (file/FIFO) read live, left camera")
    fs.add_argument("--live-right", help="EVB1 stream (file/FIFO) read live, right camera")
    fs.set_defaults(func=cmd_focus_serve)

    fr = fosub.add_parser("replay", help="headless replay: snapshots as JSON lines")
    fr.add_argument("--left", required=True)
    fr.add_argument("--right", required=True)
    fr.add_argument("--window", type=float, default=0.1)
    fr.add_argument("--cadence", type=float, default=10.0)
    fr.add_argument("--out")
    fr.set_defaults(func=cmd_focus_replay)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
