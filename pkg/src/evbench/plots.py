"""Dependency-free SVG plots: precision curves and error-vs-time traces.

Plots are views over the JSON report: every plotted number is taken from the
report document, never recomputed.
"""

from __future__ import annotations

import math

WIDTH, HEIGHT = 720, 480
MARGIN = 56
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def _scale(vals, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in vals]


def _polyline(xs, ys, color):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
    )


def _nice_ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _frame(title, xlabel, ylabel, xlo, xhi, ylo, yhi):
    left, right = MARGIN, WIDTH - 16
    top, bottom = 28, HEIGHT - MARGIN

    def sx(v):
        return _scale([v], xlo, xhi, left, right)[0]

    def sy(v):
        return _scale([v], ylo, yhi, bottom, top)[0]

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{bottom}" x2="{left}" y2="{top}" stroke="black"/>',
        f'<text x="{(left + right) / 2}" y="{HEIGHT - 14}" text-anchor="middle">{xlabel}</text>',
        f'<text x="16" y="{(top + bottom) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(top + bottom) / 2})">{ylabel}</text>',
    ]
    for v in _nice_ticks(xlo, xhi):
        x = sx(v)
        parts.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 4}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{bottom + 18}" text-anchor="middle">{v:g}</text>')
    for v in _nice_ticks(ylo, yhi):
        y = sy(v)
        parts.append(f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{v:g}</text>')
    return parts, sx, sy


def svg_precision_curves(curves: dict[str, dict]) -> str:
    """curves: weighting -> {"xi": [...], "s": [...], "auc": float}."""
    xi_all = [x for c in curves.values() for x in c["xi"]]
    parts, sx, sy = _frame(
        "Relative-velocity precision curves", "threshold ξ", "S(ξ)",
        min(xi_all), max(xi_all), 0.0, 1.0,
    )
    for i, (name, c) in enumerate(sorted(curves.items())):
        color = PALETTE[i % len(PALETTE)]
        parts.append(_polyline([sx(v) for v in c["xi"]], [sy(v) for v in c["s"]], color))
        parts.append(
            f'<text x="{WIDTH - 20}" y="{48 + 16 * i}" text-anchor="end" fill="{color}">'
            f'{name} (AUC {c["auc"]:.3f})</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


def svg_error_series(series: dict[str, dict], title: str = "Error vs time") -> str:
    """series: name -> {"t": [...], "value": [...]}; skips empty entries."""
    series = {k: v for k, v in series.items() if v["t"]}
    if not series:
        raise ValueError("nothing to plot")
    t_all = [t for s in series.values() for t in s["t"]]
    v_all = [v for s in series.values() for v in s["value"]]
    parts, sx, sy = _frame(
        title, "t [s]", "error", min(t_all), max(t_all), 0.0, max(max(v_all), 1e-12)
    )
    for i, (name, s) in enumerate(sorted(series.items())):
        color = PALETTE[i % len(PALETTE)]
        parts.append(_polyline([sx(v) for v in s["t"]], [sy(v) for v in s["value"]], color))
        parts.append(
            f'<text x="{WIDTH - 20}" y="{48 + 16 * i}" text-anchor="end" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
