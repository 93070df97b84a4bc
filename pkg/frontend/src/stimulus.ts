import { StimulusConfig } from "./types.js";

/**
 * Phase math for the calibration patterns, kept separate from drawing so the
 * timing contract is testable without a canvas.
 *
 * A flicker frequency of f Hz means f full cycles per second, i.e. 2f
 * inversions per second. Phases are derived from absolute time, so a dropped
 * animation frame cannot accumulate drift.
 */

export function checkerboardPhase(timeMs: number, frequencyHz: number): 0 | 1 {
  return Math.floor((timeMs / 1000) * 2 * frequencyHz) % 2 === 0 ? 0 : 1;
}

export function inversionsPerSecond(frequencyHz: number): number {
  return 2 * frequencyHz;
}

export function lineAngle(timeMs: number, rateRadPerS: number): number {
  return ((timeMs / 1000) * rateRadPerS) % (2 * Math.PI);
}

/** Flicker above half the display refresh cannot be rendered faithfully. */
export function flickerTooFast(frequencyHz: number, refreshHz: number): boolean {
  return frequencyHz > refreshHz / 2;
}

interface Ctx2dLike {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
}

export class StimulusRenderer {
  config: StimulusConfig;
  refreshHz: number;

  constructor(config: StimulusConfig, refreshHz = 60) {
    this.config = config;
    this.refreshHz = refreshHz;
  }

  /** Swap patterns or parameters mid-session; next frame uses the new config. */
  setConfig(config: StimulusConfig): void {
    this.config = config;
  }

  get warning(): string | null {
    if (
      this.config.kind === "checkerboard_flicker" &&
      flickerTooFast(this.config.frequency, this.refreshHz)
    ) {
      return (
        `flicker ${this.config.frequency} Hz exceeds half the display ` +
        `refresh (${this.refreshHz} Hz); rendered rate will alias`
      );
    }
    return null;
  }

  draw(ctx: Ctx2dLike, width: number, height: number, timeMs: number): void {
    const c = Math.round(255 * Math.min(Math.max(this.config.contrast, 0), 1));
    const dark = "rgb(0,0,0)";
    const light = `rgb(${c},${c},${c})`;
    if (this.config.kind === "checkerboard_flicker") {
      const phase = checkerboardPhase(timeMs, this.config.frequency);
      const n = Math.max(this.config.grid_size, 1);
      const cw = width / n;
      const ch = height / n;
      for (let i = 0; i < n; i++) {
        for (let j = 0; j < n; j++) {
          const even = (i + j) % 2 === 0;
          ctx.fillStyle = even === (phase === 0) ? light : dark;
          ctx.fillRect(i * cw, j * ch, Math.ceil(cw), Math.ceil(ch));
        }
      }
    } else {
      ctx.fillStyle = dark;
      ctx.fillRect(0, 0, width, height);
      const angle = lineAngle(timeMs, this.config.frequency);
      const cx = width / 2;
      const cy = height / 2;
      const r = Math.hypot(width, height) / 2;
      ctx.strokeStyle = light;
      ctx.lineWidth = Math.max(width / 160, 2);
      ctx.beginPath();
      ctx.moveTo(cx - r * Math.cos(angle), cy - r * Math.sin(angle));
      ctx.lineTo(cx + r * Math.cos(angle), cy + r * Math.sin(angle));
      ctx.stroke();
    }
  }
}
