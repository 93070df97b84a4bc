import { RateChart } from "./chart.js";
import { Gauges, GaugeElements, postResetPeaks } from "./gauges.js";
import { FocusSocket } from "./socket.js";
import { StimulusRenderer } from "./stimulus.js";
import { ServiceConfig, StimulusConfig } from "./types.js";

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

async function main(): Promise<void> {
  const config: ServiceConfig = await (await fetch("/config")).json();

  const stimulusCanvas = byId("stimulus") as HTMLCanvasElement;
  const chartCanvas = byId("chart") as HTMLCanvasElement;
  const gauges = new Gauges(
    {
      leftRate: byId("left-rate"),
      rightRate: byId("right-rate"),
      leftPeak: byId("left-peak"),
      rightPeak: byId("right-peak"),
      ratio: byId("ratio"),
      focusIndicator: byId("focus-indicator"),
      staleBanner: byId("stale-banner"),
      warningBanner: byId("warning-banner"),
    } satisfies GaugeElements,
    config.ratio_limit_percent,
  );

  const stimulus = new StimulusRenderer(config.stimulus);
  gauges.showWarning(stimulus.warning);

  const kindSelect = byId("stimulus-kind") as HTMLSelectElement;
  const freqInput = byId("stimulus-frequency") as HTMLInputElement;
  kindSelect.value = config.stimulus.kind;
  freqInput.value = String(config.stimulus.frequency);
  const applyStimulus = () => {
    const next: StimulusConfig = {
      ...stimulus.config,
      kind: kindSelect.value as StimulusConfig["kind"],
      frequency: Number(freqInput.value),
    };
    stimulus.setConfig(next); // switches pattern without a reload
    gauges.showWarning(stimulus.warning);
  };
  kindSelect.addEventListener("change", applyStimulus);
  freqInput.addEventListener("change", applyStimulus);

  const chart = new RateChart();
  const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws/focus`;
  const socket = new FocusSocket(wsUrl, config.cadence_hz);
  socket.onSnapshot((snap) => {
    chart.push(snap);
    gauges.update(snap);
  });
  socket.onState((state) => gauges.setConnectionState(state));
  socket.connect();

  byId("reset-peaks").addEventListener("click", () => void postResetPeaks());

  const draw = (timeMs: number) => {
    const sctx = stimulusCanvas.getContext("2d");
    if (sctx) {
      stimulusCanvas.width = stimulusCanvas.clientWidth;
      stimulusCanvas.height = stimulusCanvas.clientHeight;
      stimulus.draw(sctx, stimulusCanvas.width, stimulusCanvas.height, timeMs);
    }
    const cctx = chartCanvas.getContext("2d");
    if (cctx) {
      chartCanvas.width = chartCanvas.clientWidth;
      chartCanvas.height = chartCanvas.clientHeight;
      chart.draw(cctx, chartCanvas.width, chartCanvas.height);
    }
    requestAnimationFrame(draw);
  };
  requestAnimationFrame(draw);
}

window.addEventListener("load", () => void main());
