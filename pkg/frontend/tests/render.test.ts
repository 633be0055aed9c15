import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  MARK_COLORS,
  SPAN_MARKER_COLOR,
  beatDots,
  colorForBeat,
  spanMarkers,
  tachogramPoints,
  traceSegments,
  waveformEnvelope,
} from "../src/render.js";
import { parseSession } from "../src/schema.js";
import type { Beat } from "../src/types.js";
import { activeBeats } from "../src/types.js";

const golden = parseSession(
  readFileSync(join(__dirname, "fixtures", "golden.session.json"), "utf8"),
);

function mark(klass: Beat["class"]): Beat {
  return { t: 1, class: klass, reason: null, prov: "DETECTOR", pwave: "UNEVALUATED", noise: 0 };
}

describe("colour mapping", () => {
  it("matches the mark glossary exactly", () => {
    expect(colorForBeat(mark("INCLUDED"))).toBe(MARK_COLORS.valid);
    expect(colorForBeat(mark("EXCLUDED"))).toBe(MARK_COLORS.invalid);
    expect(colorForBeat(mark("REMOVED"))).toBe(MARK_COLORS.removable);
    expect(colorForBeat(mark("ADJUSTED"))).toBe(MARK_COLORS.shortLongPair);
    expect(colorForBeat(mark("INTERPOLATED"))).toBe(MARK_COLORS.interpolated);
    expect(colorForBeat(mark("TRAINING"))).toBe(MARK_COLORS.training);
  });

  it("marks the viewport with purple lines", () => {
    const markers = spanMarkers({ start: 3, end: 9 });
    expect(markers).toEqual([
      { t: 3, color: SPAN_MARKER_COLOR },
      { t: 9, color: SPAN_MARKER_COLOR },
    ]);
  });
});

describe("waveformEnvelope", () => {
  const fs = 250;
  const samples = Float64Array.from(
    { length: 10 * fs },
    (_, i) => Math.sin((2 * Math.PI * 7 * i) / fs),
  );

  it("emits at most one min/max pair per pixel column", () => {
    const columns = waveformEnvelope(samples, fs, { start: 0, end: 10 }, 300);
    expect(columns.length).toBeLessThanOrEqual(300);
    const seen = new Set(columns.map((c) => c.x));
    expect(seen.size).toBe(columns.length); // one entry per column
    for (const c of columns) expect(c.min).toBeLessThanOrEqual(c.max);
  });

  it("bounds the enclosed samples exactly", () => {
    const columns = waveformEnvelope(samples, fs, { start: 2, end: 4 }, 100);
    for (const c of columns) {
      const t0 = 2 + (c.x / 100) * 2;
      const t1 = 2 + ((c.x + 1) / 100) * 2;
      const lo = Math.max(0, Math.ceil(t0 * fs));
      const hi = Math.min(samples.length, Math.ceil(t1 * fs));
      const slice = Array.from(samples.slice(lo, hi));
      expect(c.min).toBe(Math.min(...slice));
      expect(c.max).toBe(Math.max(...slice));
    }
  });

  it("is pure: identical input gives identical geometry", () => {
    const a = waveformEnvelope(samples, fs, { start: 1, end: 9 }, 200);
    const b = waveformEnvelope(samples, fs, { start: 1, end: 9 }, 200);
    expect(a).toEqual(b);
  });

  it("matches a geometry snapshot", () => {
    const columns = waveformEnvelope(samples, fs, { start: 0, end: 0.1 }, 8);
    expect(columns).toMatchSnapshot();
  });
});

describe("tachogramPoints", () => {
  it("is one-to-one with intervals of non-removed beats in view", () => {
    const viewport = { start: 0, end: golden.record_duration };
    const points = tachogramPoints(golden, viewport);
    expect(points.length).toBe(activeBeats(golden).length - 1);
  });

  it("labels durations to the millisecond", () => {
    const points = tachogramPoints(golden, { start: 50, end: 60 });
    for (const p of points) {
      expect(p.label).toBe(p.duration.toFixed(3));
    }
  });

  it("reacts to beat removal", () => {
    const viewport = { start: 0, end: golden.record_duration };
    const before = tachogramPoints(golden, viewport).length;
    const clone = structuredClone(golden);
    const victim = clone.beats.findIndex((b) => b.class === "INCLUDED");
    clone.beats[victim].class = "REMOVED";
    expect(tachogramPoints(clone, viewport).length).toBe(before - 1);
  });
});

describe("traceSegments", () => {
  it("paints bad spans black and the rest blue", () => {
    const segments = traceSegments(golden.regions, {
      start: 0,
      end: golden.record_duration,
    });
    const bad = golden.regions.filter((r) => r.reason !== "TRAINING");
    expect(segments.filter((s) => s.color === "#000000").length).toBe(bad.length);
    // segments tile the viewport without gaps
    for (let i = 1; i < segments.length; i++) {
      expect(segments[i].start).toBeCloseTo(segments[i - 1].end, 12);
    }
  });
});

describe("beatDots", () => {
  it("shows every beat in the viewport with its class colour", () => {
    const region = golden.regions.find((r) => r.reason === "IRREGULAR")!;
    const dots = beatDots(golden, { start: region.start - 5, end: region.end + 5 });
    expect(dots.length).toBeGreaterThan(0);
    expect(dots.some((d) => d.color === MARK_COLORS.invalid)).toBe(true);
  });
});
