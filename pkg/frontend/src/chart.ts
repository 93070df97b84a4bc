import { FocusSnapshot } from "./types.js";

export const HISTORY_SECONDS = 30;

interface Ctx2dLike {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  setLineDash(segments: number[]): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
}

/**
 * Scrolling history of the last 30 s of snapshots plus session-peak markers.
 *
 * The buffer holds received FocusSnapshot values untouched: everything drawn
 * (rates, peaks) is a field of some snapshot, never recomputed client-side.
 */
export class RateChart {
  history: FocusSnapshot[] = [];

  push(snap: FocusSnapshot): void {
    this.history.push(snap);
    const cutoff = snap.t - HISTORY_SECONDS;
    while (this.history.length && this.history[0].t < cutoff) {
      this.history.shift();
    }
  }

  clear(): void {
    this.history = [];
  }

  latest(): FocusSnapshot | null {
    return this.history.length ? this.history[this.history.length - 1] : null;
  }

  /** Max of plotted values; peak markers must stay inside the viewport. */
  yMax(): number {
    let m = 1;
    for (const s of this.history) {
      m = Math.max(m, s.left_rate, s.right_rate, s.left_peak, s.right_peak);
    }
    return m;
  }

  draw(ctx: Ctx2dLike, width: number, height: number): void {
    ctx.fillStyle = "#111";
    ctx.fillRect(0, 0, width, height);
    const latest = this.latest();
    if (!latest) return;
    const t1 = latest.t;
    const t0 = t1 - HISTORY_SECONDS;
    const ymax = this.yMax() * 1.05;
    const sx = (t: number) => ((t - t0) / HISTORY_SECONDS) * width;
    const sy = (v: number) => height - (v / ymax) * height;

    const trace = (pick: (s: FocusSnapshot) => number, color: string) => {
      ctx.strokeStyle = color;
      ctx.lineWidth = 2;
      ctx.setLineDash([]);
      ctx.beginPath();
      this.history.forEach((s, i) => {
        const x = sx(s.t);
        const y = sy(pick(s));
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.stroke();
    };
    trace((s) => s.left_rate, "#4fc3f7");
    trace((s) => s.right_rate, "#ff8a65");

    const marker = (value: number, color: string, label: string) => {
      ctx.strokeStyle = color;
      ctx.lineWidth = 1;
      ctx.setLineDash([6, 4]);
      ctx.beginPath();
      ctx.moveTo(0, sy(value));
      ctx.lineTo(width, sy(value));
      ctx.stroke();
      ctx.fillStyle = color;
      ctx.font = "11px sans-serif";
      ctx.fillText(label, 4, sy(value) - 3);
    };
    marker(latest.left_peak, "#4fc3f7", `peak L ${latest.left_peak.toFixed(0)}`);
    marker(latest.right_peak, "#ff8a65", `peak R ${latest.right_peak.toFixed(0)}`);
  }
}
