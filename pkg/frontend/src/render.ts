/** Pure view geometry: everything the canvases draw is computed here
 * from the session and viewport alone, so rendering is snapshot-
 * testable and identical state always yields identical geometry. */

import type { Beat, Region, Session } from "./types.js";
import { activeBeats } from "./types.js";

export interface Viewport {
  start: number;
  end: number;
}

/** Mark colours, keyed by what the mark means in the viewer. */
export const MARK_COLORS = {
  valid: "#1f5fd6",        // blue: valid QRS or corrected peak
  invalid: "#d62728",      // red: uncorrectable / excluded peak
  removable: "#2ca02c",    // green: surplus detection (removed)
  shortLongPair: "#e377c2",// pink: short-long pair (re-timed beat)
  interpolated: "#17becf", // cyan: long interval split by interpolation
  training: "#8c8c8c",     // grey: training section (never analyzed)
} as const;

export const WAVEFORM_VALID_COLOR = "#1f5fd6"; // blue trace
export const WAVEFORM_BAD_COLOR = "#000000";   // black trace inside bad spans
export const SPAN_MARKER_COLOR = "#8a2be2";    // purple viewport markers
export const TACHOGRAM_LABEL_COLOR = "#d62728"; // red duration labels

export function colorForBeat(beat: Beat): string {
  switch (beat.class) {
    case "INCLUDED":
      return MARK_COLORS.valid;
    case "EXCLUDED":
      return MARK_COLORS.invalid;
    case "REMOVED":
      return MARK_COLORS.removable;
    case "ADJUSTED":
      return MARK_COLORS.shortLongPair;
    case "INTERPOLATED":
      return MARK_COLORS.interpolated;
    case "TRAINING":
      return MARK_COLORS.training;
  }
}

/** Spans drawn in black: regions excluded for cause (not training). */
export function badSpans(regions: Region[]): Region[] {
  return regions.filter(
    (r) => r.reason === "IRREGULAR" || r.reason === "NOISE" || r.reason === "MANUAL",
  );
}

export interface EnvelopeColumn {
  x: number;    // pixel column
  min: number;
  max: number;
}

/** Min/max decimation of a waveform for one canvas width.
 *
 * Each pixel column carries at most one min/max pair (2 points), well
 * under the 4-points-per-column budget; when fewer than four samples
 * fall in a column the raw samples bound the pair exactly.
 */
export function waveformEnvelope(
  samples: ArrayLike<number>,
  sampleRate: number,
  viewport: Viewport,
  widthPx: number,
): EnvelopeColumn[] {
  const columns: EnvelopeColumn[] = [];
  if (widthPx <= 0 || viewport.end <= viewport.start) return columns;
  const span = viewport.end - viewport.start;
  for (let x = 0; x < widthPx; x++) {
    const t0 = viewport.start + (x / widthPx) * span;
    const t1 = viewport.start + ((x + 1) / widthPx) * span;
    const lo = Math.max(0, Math.ceil(t0 * sampleRate));
    const hi = Math.min(samples.length, Math.ceil(t1 * sampleRate));
    if (hi <= lo) continue;
    let min = samples[lo];
    let max = samples[lo];
    for (let i = lo + 1; i < hi; i++) {
      const v = samples[i];
      if (v < min) min = v;
      if (v > max) max = v;
    }
    columns.push({ x, min, max });
  }
  return columns;
}

export interface BeatDot {
  t: number;
  index: number; // index into session.beats
  color: string;
  klass: Beat["class"];
}

/** Dots for beats inside the viewport (removed beats are shown too so
 * deletions stay reviewable; they render in green). */
export function beatDots(session: Session, viewport: Viewport): BeatDot[] {
  const dots: BeatDot[] = [];
  session.beats.forEach((beat, index) => {
    if (beat.t >= viewport.start && beat.t <= viewport.end) {
      dots.push({ t: beat.t, index, color: colorForBeat(beat), klass: beat.class });
    }
  });
  return dots;
}

export interface TachogramPoint {
  tMid: number;
  duration: number;
  label: string;
}

/** Tachogram points, one per interval of currently non-removed beats
 * whose midpoint lies in the viewport. */
export function tachogramPoints(
  session: Session,
  viewport: Viewport,
): TachogramPoint[] {
  const beats = activeBeats(session);
  const points: TachogramPoint[] = [];
  for (let i = 1; i < beats.length; i++) {
    const duration = beats[i].t - beats[i - 1].t;
    const tMid = (beats[i].t + beats[i - 1].t) / 2;
    if (tMid >= viewport.start && tMid <= viewport.end) {
      points.push({ tMid, duration, label: duration.toFixed(3) });
    }
  }
  return points;
}

/** Vertical span markers on the full-record panel. */
export function spanMarkers(viewport: Viewport): { t: number; color: string }[] {
  return [
    { t: viewport.start, color: SPAN_MARKER_COLOR },
    { t: viewport.end, color: SPAN_MARKER_COLOR },
  ];
}

/** Split the viewport into alternating valid/bad trace segments so the
 * waveform can be stroked blue outside and black inside bad spans. */
export function traceSegments(
  regions: Region[],
  viewport: Viewport,
): { start: number; end: number; color: string }[] {
  const bad = badSpans(regions)
    .filter((r) => r.start < viewport.end && r.end > viewport.start)
    .map((r) => ({
      start: Math.max(r.start, viewport.start),
      end: Math.min(r.end, viewport.end),
    }))
    .sort((a, b) => a.start - b.start);
  const segments: { start: number; end: number; color: string }[] = [];
  let cursor = viewport.start;
  for (const span of bad) {
    if (span.start > cursor) {
      segments.push({ start: cursor, end: span.start, color: WAVEFORM_VALID_COLOR });
    }
    segments.push({
      start: Math.max(span.start, cursor),
      end: span.end,
      color: WAVEFORM_BAD_COLOR,
    });
    cursor = Math.max(cursor, span.end);
  }
  if (cursor < viewport.end) {
    segments.push({ start: cursor, end: viewport.end, color: WAVEFORM_VALID_COLOR });
  }
  return segments;
}
