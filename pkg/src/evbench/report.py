"""JSON report assembly (schema "evbench_report_v1").

Units throughout: meters, radians, seconds. Reports embed the full error
series so every headline scalar can be recomputed from the document alone,
and echo the run configuration verbatim for provenance.
"""

from __future__ import annotations

import json
from typing import Any

from .alignment import SimilarityTransform
from .metrics import ErrorSeries, MetricReport, PrecisionCurve

SCHEMA = "evbench_report_v1"


def _series_payload(series: ErrorSeries) -> dict:
    return {
        "kind": series.kind,
        "t": series.t.tolist(),
        "value": series.value.tolist(),
    }


def _curve_payload(curve: PrecisionCurve, auc: float) -> dict:
    return {
        "weighting": curve.weighting,
        "xi": curve.xi.tolist(),
        "s": curve.s.tolist(),
        "auc": auc,
    }


def _alignment_payload(mode: str, transform: SimilarityTransform, residual: float | None) -> dict:
    return {
        "mode": mode,
        "scale": transform.scale,
        "rotation_wxyz": transform.pose.rotation.q.tolist(),
        "translation": transform.pose.translation.tolist(),
        "residual_sum_sq": residual,
        # Eq-fidelity note: the full-pose error norm uses the exact SE(3) log
        # (closed-form V-inverse), mixing meters and radians in one 6-vector.
        "pose_error_definition": "se3_log_exact_v_inverse",
    }


def evaluation_document(
    report: MetricReport,
    config: dict[str, Any],
    alignment_residual: float | None = None,
) -> dict:
    doc = {
        "schema": SCHEMA,
        "kind": "evaluation",
        "sequence": report.sequence,
        "config": config,
        "alignment": _alignment_payload(
            report.alignment_mode, report.alignment, alignment_residual
        ),
        "association": {"pairs": report.pair_count},
        "ate": report.ate,
        "rpe": {"delta_samples": report.rpe_delta, **report.rpe},
        "velocity": report.velocity,
        "series": {k: _series_payload(v) for k, v in report.series.items()},
        "notes": list(report.notes),
    }
    return doc


def diagnostics_document(config: dict[str, Any], sections: dict[str, Any]) -> dict:
    return {"schema": SCHEMA, "kind": "diagnostics", "config": config, **sections}


def dumps(doc: dict) -> str:
    """Deterministic serialization: sorted keys, no whitespace variance."""
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def write(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(doc))
