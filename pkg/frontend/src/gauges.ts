import { ConnectionState, FocusSnapshot } from "./types.js";

export interface GaugeElements {
  leftRate: HTMLElement;
  rightRate: HTMLElement;
  leftPeak: HTMLElement;
  rightPeak: HTMLElement;
  ratio: HTMLElement;
  focusIndicator: HTMLElement;
  staleBanner: HTMLElement;
  warningBanner: HTMLElement;
}

export function formatRate(v: number): string {
  return `${v.toFixed(0)} ev/s`;
}

export function formatRatio(v: number | null): string {
  return v === null ? "n/a" : `${v >= 0 ? "+" : ""}${v.toFixed(2)} %`;
}

/**
 * Numeric readouts and status banners. Every displayed number is a formatted
 * snapshot field; thresholds come from the service /config.
 */
export class Gauges {
  private el: GaugeElements;
  private ratioLimitPercent: number;

  constructor(el: GaugeElements, ratioLimitPercent: number) {
    this.el = el;
    this.ratioLimitPercent = ratioLimitPercent;
  }

  update(snap: FocusSnapshot): void {
    this.el.leftRate.textContent = formatRate(snap.left_rate);
    this.el.rightRate.textContent = formatRate(snap.right_rate);
    this.el.leftPeak.textContent = formatRate(snap.left_peak);
    this.el.rightPeak.textContent = formatRate(snap.right_peak);
    this.el.ratio.textContent = formatRatio(snap.ratio_percent);
    const matched =
      snap.ratio_percent !== null &&
      Math.abs(snap.ratio_percent) <= this.ratioLimitPercent;
    this.el.ratio.classList.toggle("matched", matched);
    this.el.ratio.classList.toggle("mismatched", !matched);
    this.el.focusIndicator.classList.toggle("in-focus", snap.in_focus);
    this.el.focusIndicator.textContent = snap.in_focus ? "IN FOCUS" : "adjusting";
  }

  setConnectionState(state: ConnectionState): void {
    const stale = state !== "live";
    this.el.staleBanner.classList.toggle("visible", stale);
    this.el.staleBanner.textContent =
      state === "live" ? "" : `telemetry ${state}`;
  }

  showWarning(message: string | null): void {
    this.el.warningBanner.classList.toggle("visible", message !== null);
    this.el.warningBanner.textContent = message ?? "";
  }
}

export async function postResetPeaks(baseUrl = ""): Promise<void> {
  await fetch(`${baseUrl}/reset-peaks`, { method: "POST" });
}
