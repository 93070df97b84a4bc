#!/usr/bin/env python3
"""End-to-end synthetic evaluation experiment.

Generates a circular ground-truth trajectory, perturbs it into a fake
estimate, writes both as TUM files, runs the full evaluation pipeline via the
CLI, and prints the headline numbers from the emitted JSON report.

Usage: python scripts/run_synthetic_eval.py [workdir]
"""

import json
import pathlib
import sys

from evbench.cli import main as evbench_main


def run(workdir: pathlib.Path) -> None:
    workdir.mkdir(parents=True, exist_ok=True)
    gt = workdir / "gt.txt"
    est = workdir / "est.txt"
    vel = workdir / "gt_vel.txt"
    out = workdir / "report.json"

    code = evbench_main([
        "synth", "--pattern", "circle", "--radius", "2.0", "--rate", "1.0",
        "--duration", "20", "--hz", "120",
        "--pos-sigma", "0.005", "--rot-sigma", "0.002", "--seed", "42",
        "--out-gt", str(gt), "--out-est", str(est), "--out-vel", str(vel),
    ])
    assert code == 0, "fixture synthesis failed"

    # estimator velocity is derived from the noisy poses; smooth the finite
    # differences, otherwise position noise dominates the velocity signal
    code = evbench_main([
        "evaluate", "--gt", str(gt), "--est", str(est),
        "--align", "se3", "--weights", "velocity", "--vel-smoothing", "5",
        "--out", str(out), "--svg", "--sequence", "synthetic_circle",
    ])
    assert code == 0, "evaluation failed"

    doc = json.loads(out.read_text())
    print(f"report: {out}")
    print(f"pairs associated: {doc['association']['pairs']}")
    ate = doc["ate"]["translation_only"]
    print(f"ATE translation rms: {ate['rms']:.4f} m   (paper-style: {ate['paper_eq2']:.6f})")
    rpe = doc["rpe"]["translation_only"]
    print(f"RPE translation rms (delta={doc['rpe']['delta_samples']}): {rpe['rms']:.4f} m")
    for scheme, curve in doc["velocity"]["curves"].items():
        print(f"AUC [{scheme:8s}]: {curve['auc']:.4f}")
    print(f"low-speed exclusions: {doc['velocity']['excluded_low_speed']}")
    print(f"plots: {out.with_name('report_curves.svg')}, {out.with_name('report_errors.svg')}")


if __name__ == "__main__":
    run(pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "out/synthetic_eval"))
