import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  applyEditToState,
  editCountsByRegion,
  exportEdited,
  loadSession,
  selectRegion,
} from "../src/state.js";
import { parseSession } from "../src/schema.js";
import { isValidBeat } from "../src/types.js";

const goldenText = readFileSync(
  join(__dirname, "fixtures", "golden.session.json"),
  "utf8",
);

describe("loadSession", () => {
  it("selects the first irregular region", () => {
    const state = loadSession(goldenText);
    expect(state.selectedRegion).not.toBeNull();
    const region = state.session.regions[state.selectedRegion!];
    expect(region.reason).toBe("IRREGULAR");
    // earlier regions are training only
    for (let i = 0; i < state.selectedRegion!; i++) {
      expect(state.session.regions[i].reason).toBe("TRAINING");
    }
    expect(state.viewport.start).toBeLessThan(region.start);
    expect(state.viewport.end).toBeGreaterThan(region.end);
  });

  it("shows the whole record when there are no reviewable regions", () => {
    const session = parseSession(goldenText);
    session.regions = [];
    const state = loadSession(JSON.stringify(session));
    expect(state.selectedRegion).toBeNull();
    expect(state.viewport.start).toBe(0);
    expect(state.viewport.end).toBe(session.record_duration);
  });

  it("region navigation recentres the viewport", () => {
    let state = loadSession(goldenText);
    const last = state.session.regions.length - 1;
    state = selectRegion(state, last);
    const region = state.session.regions[last];
    expect(state.viewport.end).toBeGreaterThanOrEqual(region.end);
  });
});

describe("exportEdited", () => {
  it("is byte-identical to the input when nothing was edited", () => {
    const state = loadSession(goldenText);
    expect(exportEdited(state)).toBe(goldenText);
  });

  it("produces a parseable session with one fewer valid beat after DELETE", () => {
    let state = loadSession(goldenText);
    const preValid = state.session.beats.filter(isValidBeat).length;
    const victim = state.session.beats.find(
      (b) => b.class === "INCLUDED" && b.t > 50,
    )!;
    state = applyEditToState(state, {
      kind: "DELETE",
      target_time: victim.t,
      timestamp: "2024-06-01T09:00:00",
    });
    const text = exportEdited(state);
    expect(text).not.toBe(goldenText);
    const back = parseSession(text);
    expect(back.beats.filter(isValidBeat).length).toBe(preValid - 1);
    expect(back.edits.length).toBe(1);
    expect(back.edits[0].kind).toBe("DELETE");
  });
});

describe("editCountsByRegion", () => {
  it("counts edits whose target falls inside each region", () => {
    let state = loadSession(goldenText);
    const region = state.session.regions[state.selectedRegion!];
    const inside = state.session.beats.find(
      (b) => b.t >= region.start && b.t <= region.end,
    )!;
    state = applyEditToState(state, {
      kind: "DELETE",
      target_time: inside.t,
    });
    const counts = editCountsByRegion(state.session);
    expect(counts[state.selectedRegion!]).toBe(1);
    expect(counts.reduce((a, b) => a + b, 0)).toBe(1);
  });
});
