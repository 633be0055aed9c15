/** DOM wiring for the review window. All drawing geometry comes from
 * the pure functions in render.ts; this module only moves pixels and
 * reacts to input. Session state changes only on this (UI) thread;
 * record files decode in a worker. */

import { applyEditToState, editCountsByRegion, exportEdited, loadSession, selectRegion, setViewport, ViewState } from "./state.js";
import {
  SPAN_MARKER_COLOR,
  TACHOGRAM_LABEL_COLOR,
  beatDots,
  spanMarkers,
  tachogramPoints,
  traceSegments,
  waveformEnvelope,
} from "./render.js";
import type { EditInput } from "./edits.js";

let state: ViewState | null = null;
let selectedBeat: number | null = null;

const $ = (id: string) => document.getElementById(id)!;
const canvas = (id: string) => $(id) as HTMLCanvasElement;

function status(message: string, isError = false): void {
  const bar = $("status");
  bar.textContent = message;
  bar.className = isError ? "status error" : "status";
}

function nowStamp(): string {
  return new Date().toISOString().slice(0, 19);
}

// ------------------------------------------------------------------ drawing

function timeToX(t: number, start: number, end: number, width: number): number {
  return ((t - start) / (end - start)) * width;
}

function drawWaveformPanel(
  ctx: CanvasRenderingContext2D,
  view: { start: number; end: number },
  width: number,
  height: number,
): void {
  if (!state) return;
  ctx.clearRect(0, 0, width, height);
  const record = state.record;
  const segments = traceSegments(state.session.regions, view);
  if (!record) {
    // no waveform loaded: draw beat rails only
    for (const segment of segments) {
      ctx.fillStyle = segment.color === "#000000" ? "#00000022" : "#1f5fd611";
      const x0 = timeToX(segment.start, view.start, view.end, width);
      const x1 = timeToX(segment.end, view.start, view.end, width);
      ctx.fillRect(x0, 0, x1 - x0, height);
    }
    return;
  }
  const columns = waveformEnvelope(record.samples, record.sampleRate, view, width);
  if (!columns.length) return;
  let lo = Infinity;
  let hi = -Infinity;
  for (const c of columns) {
    if (c.min < lo) lo = c.min;
    if (c.max > hi) hi = c.max;
  }
  const pad = 0.05 * (hi - lo || 1);
  lo -= pad;
  hi += pad;
  const y = (v: number) => height - ((v - lo) / (hi - lo)) * height;
  const colorAt = (t: number) =>
    segments.find((s) => t >= s.start && t <= s.end)?.color ?? "#1f5fd6";
  for (const c of columns) {
    const t = view.start + (c.x / width) * (view.end - view.start);
    ctx.strokeStyle = colorAt(t);
    ctx.beginPath();
    ctx.moveTo(c.x + 0.5, y(c.min));
    ctx.lineTo(c.x + 0.5, y(c.max) - 1);
    ctx.stroke();
  }
}

function drawZoomPanel(): void {
  if (!state) return;
  const el = canvas("zoom-panel");
  const ctx = el.getContext("2d")!;
  const { width, height } = el;
  drawWaveformPanel(ctx, state.viewport, width, height);
  // beat dots along the lower rail, selected beat ringed
  const dots = beatDots(state.session, state.viewport);
  for (const dot of dots) {
    const x = timeToX(dot.t, state.viewport.start, state.viewport.end, width);
    ctx.fillStyle = dot.color;
    ctx.beginPath();
    ctx.arc(x, height - 12, 4, 0, 2 * Math.PI);
    ctx.fill();
    if (selectedBeat === dot.index) {
      ctx.strokeStyle = "#333";
      ctx.beginPath();
      ctx.arc(x, height - 12, 7, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }
  // interval durations in red near the midpoints
  ctx.fillStyle = TACHOGRAM_LABEL_COLOR;
  ctx.font = "11px sans-serif";
  ctx.textAlign = "center";
  for (const point of tachogramPoints(state.session, state.viewport)) {
    const x = timeToX(point.tMid, state.viewport.start, state.viewport.end, width);
    ctx.fillText(point.label, x, 14);
  }
}

function drawFullPanel(): void {
  if (!state) return;
  const el = canvas("full-panel");
  const ctx = el.getContext("2d")!;
  const { width, height } = el;
  const whole = { start: 0, end: Math.max(state.session.record_duration, 1e-6) };
  drawWaveformPanel(ctx, whole, width, height);
  ctx.strokeStyle = SPAN_MARKER_COLOR;
  ctx.lineWidth = 2;
  for (const marker of spanMarkers(state.viewport)) {
    const x = timeToX(marker.t, whole.start, whole.end, width);
    ctx.beginPath();
    ctx.moveTo(x, 0);
    ctx.lineTo(x, height);
    ctx.stroke();
  }
  ctx.lineWidth = 1;
}

function drawTachogram(): void {
  if (!state) return;
  const el = canvas("tacho-panel");
  const ctx = el.getContext("2d")!;
  const { width, height } = el;
  ctx.clearRect(0, 0, width, height);
  const points = tachogramPoints(state.session, state.viewport);
  if (!points.length) return;
  let lo = Infinity;
  let hi = -Infinity;
  for (const p of points) {
    if (p.duration < lo) lo = p.duration;
    if (p.duration > hi) hi = p.duration;
  }
  const pad = 0.1 * (hi - lo || 0.1);
  lo -= pad;
  hi += pad;
  const y = (v: number) => height - ((v - lo) / (hi - lo)) * height;
  ctx.strokeStyle = "#555";
  ctx.beginPath();
  points.forEach((p, i) => {
    const x = timeToX(p.tMid, state!.viewport.start, state!.viewport.end, width);
    if (i === 0) ctx.moveTo(x, y(p.duration));
    else ctx.lineTo(x, y(p.duration));
  });
  ctx.stroke();
  ctx.fillStyle = TACHOGRAM_LABEL_COLOR;
  for (const p of points) {
    const x = timeToX(p.tMid, state.viewport.start, state.viewport.end, width);
    ctx.beginPath();
    ctx.arc(x, y(p.duration), 2.5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function refreshRegionList(): void {
  if (!state) return;
  const list = $("region-list");
  list.innerHTML = "";
  const counts = editCountsByRegion(state.session);
  state.session.regions.forEach((region, index) => {
    const row = document.createElement("li");
    row.className = index === state!.selectedRegion ? "region selected" : "region";
    row.textContent =
      `${region.reason} ${region.start.toFixed(2)}-${region.end.toFixed(2)} s` +
      ` (edits: ${counts[index]})`;
    row.onclick = () => {
      state = selectRegion(state!, index);
      selectedBeat = null;
      redraw();
    };
    list.appendChild(row);
  });
}

function refreshLog(): void {
  if (!state) return;
  const log = $("edit-log");
  log.innerHTML = "";
  for (const entry of state.session.edits) {
    const row = document.createElement("li");
    const target =
      entry.target_time !== null
        ? `@${entry.target_time.toFixed(3)}s`
        : entry.target_index !== null
          ? `#${entry.target_index}`
          : "";
    row.textContent = `${entry.ordinal}: ${entry.kind} ${target}`;
    log.appendChild(row);
  }
}

function redraw(): void {
  if (!state) return;
  refreshRegionList();
  refreshLog();
  drawZoomPanel();
  drawFullPanel();
  drawTachogram();
  const beat =
    selectedBeat !== null ? state.session.beats[selectedBeat] : null;
  $("selection").textContent = beat
    ? `selected beat: ${beat.t.toFixed(3)} s [${beat.class}]`
    : "no beat selected (click a dot)";
}

// ------------------------------------------------------------------- edits

function edit(input: EditInput): void {
  if (!state) return;
  try {
    state = applyEditToState(state, { ...input, timestamp: nowStamp() });
    selectedBeat = null;
    status(`${input.kind} applied (${state.session.edits.length} edits)`);
  } catch (err) {
    status((err as Error).message, true);
  }
  redraw();
}

function selectedBeatTime(): number | null {
  if (!state || selectedBeat === null) return null;
  return state.session.beats[selectedBeat].t;
}

function wireControls(): void {
  ($("session-file") as HTMLInputElement).onchange = async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      state = loadSession(await file.text());
      selectedBeat = null;
      status(
        `loaded ${file.name}: ${state.session.beats.length} beats, ` +
        `${state.session.regions.length} regions`,
      );
    } catch (err) {
      status((err as Error).message, true);
    }
    redraw();
  };

  ($("record-file") as HTMLInputElement).onchange = async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file || !state) return;
    status(`parsing ${file.name} in the background...`);
    const buffer = await file.arrayBuffer();
    const worker = new Worker("./worker.js", { type: "module" });
    worker.onmessage = (msg) => {
      const data = msg.data;
      if (data.type === "progress") {
        status(`parsing ${file.name}: ${Math.round(data.fraction * 100)} %`);
      } else if (data.type === "done") {
        if (state) {
          state = {
            ...state,
            record: { samples: data.samples, sampleRate: data.sampleRate },
          };
        }
        status(`waveform loaded (${data.samples.length} samples)`);
        worker.terminate();
        redraw();
      } else {
        status(`waveform load failed: ${data.message}`, true);
        worker.terminate();
      }
    };
    worker.postMessage({ name: file.name, buffer }, [buffer]);
  };

  canvas("zoom-panel").onclick = (ev) => {
    if (!state) return;
    const el = canvas("zoom-panel");
    const rect = el.getBoundingClientRect();
    const x = ((ev.clientX - rect.left) / rect.width) * el.width;
    const t =
      state.viewport.start +
      (x / el.width) * (state.viewport.end - state.viewport.start);
    let best: number | null = null;
    let bestDistance = Infinity;
    state.session.beats.forEach((beat, index) => {
      const d = Math.abs(beat.t - t);
      if (d < bestDistance) {
        best = index;
        bestDistance = d;
      }
    });
    const span = state.viewport.end - state.viewport.start;
    selectedBeat = bestDistance <= span * 0.02 ? best : null;
    redraw();
  };

  $("btn-delete").onclick = () => {
    const t = selectedBeatTime();
    if (t === null) return status("select a beat first", true);
    edit({ kind: "DELETE", target_time: t });
  };
  $("btn-add").onclick = () => {
    const value = Number(($("add-time") as HTMLInputElement).value);
    if (!Number.isFinite(value)) return status("enter a time to add", true);
    edit({ kind: "ADD", target_time: value });
  };
  $("btn-interpolate").onclick = () => {
    const t = selectedBeatTime();
    if (t === null) return status("select a beat first", true);
    const count = Number(($("interp-count") as HTMLInputElement).value) || 1;
    edit({ kind: "INTERPOLATE", target_time: t, params: { count } });
  };
  $("btn-relocate").onclick = () => {
    const t = selectedBeatTime();
    if (t === null) return status("select a beat first", true);
    const to = Number(($("relocate-to") as HTMLInputElement).value);
    if (!Number.isFinite(to)) return status("enter the new time", true);
    edit({ kind: "RELOCATE", target_time: t, params: { to } });
  };
  $("btn-invert").onclick = () => edit({ kind: "INVERT_SIGNAL" });
  $("btn-region-add").onclick = () => {
    if (!state) return;
    edit({
      kind: "REGION_OVERRIDE",
      params: {
        action: "add",
        start: state.viewport.start,
        end: state.viewport.end,
      },
    });
  };
  $("btn-region-remove").onclick = () => {
    if (!state || state.selectedRegion === null) {
      return status("select a region first", true);
    }
    edit({
      kind: "REGION_OVERRIDE",
      target_index: state.selectedRegion,
      params: { action: "remove" },
    });
  };

  $("btn-prev").onclick = () => step(-1);
  $("btn-next").onclick = () => step(+1);
  $("btn-zoom-out").onclick = () => {
    if (!state) return;
    const span = state.viewport.end - state.viewport.start;
    state = setViewport(
      state, state.viewport.start - span / 2, state.viewport.end + span / 2,
    );
    redraw();
  };

  $("btn-export").onclick = () => {
    if (!state) return;
    const text = exportEdited(state);
    const blob = new Blob([text], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "reviewed.session.json";
    link.click();
    URL.revokeObjectURL(link.href);
    status(`exported (${state.session.edits.length} edits in log)`);
  };
}

function step(direction: number): void {
  if (!state || !state.session.regions.length) return;
  const current = state.selectedRegion ?? 0;
  const next = Math.min(
    Math.max(current + direction, 0),
    state.session.regions.length - 1,
  );
  state = selectRegion(state, next);
  selectedBeat = null;
  redraw();
}

wireControls();
status("load a session file to begin");
