/** Wire types of the focus service; field names match the JSON exactly. */

export interface FocusSnapshot {
  t: number;
  left_rate: number;
  right_rate: number;
  ratio_percent: number | null;
  left_peak: number;
  right_peak: number;
  in_focus: boolean;
  window: number;
}

export interface StimulusConfig {
  kind: "checkerboard_flicker" | "rotating_line";
  frequency: number; // Hz for flicker cycles, rad/s for line rotation
  grid_size: number;
  contrast: number;
}

export interface ServiceConfig {
  window: number;
  cadence_hz: number;
  peak_fraction: number;
  ratio_limit_percent: number;
  stimulus: StimulusConfig;
}

export type ConnectionState = "connecting" | "live" | "stale" | "closed";
