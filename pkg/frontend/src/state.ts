/** View state: the loaded session, region selection and viewport. */

import { parseSession, serializeSession } from "./schema.js";
import type { EditInput } from "./edits.js";
import { applyEdit } from "./edits.js";
import type { Region, Session } from "./types.js";

export interface LoadedRecord {
  samples: Float64Array;
  sampleRate: number;
}

export interface ViewState {
  session: Session;
  /** Original file text, returned verbatim when nothing was edited. */
  rawText: string;
  /** Number of edits applied in this review (0 = pristine). */
  appliedEdits: number;
  selectedRegion: number | null;
  viewport: { start: number; end: number };
  record: LoadedRecord | null;
}

/** Seconds of valid context shown around a selected region. */
export const REGION_CONTEXT_S = 5.0;

function reviewableRegions(session: Session): number[] {
  const indices: number[] = [];
  session.regions.forEach((region, i) => {
    if (region.reason !== "TRAINING") indices.push(i);
  });
  return indices;
}

function viewportForRegion(session: Session, region: Region) {
  const start = Math.max(0, region.start - REGION_CONTEXT_S);
  const end = Math.min(
    Math.max(session.record_duration, region.end),
    region.end + REGION_CONTEXT_S,
  );
  return { start, end };
}

/** Parse a session file and build the initial view: reviewable regions
 * listed, the first irregular one selected, full record otherwise. */
export function loadSession(text: string): ViewState {
  const session = parseSession(text);
  const reviewable = reviewableRegions(session);
  const selected = reviewable.length ? reviewable[0] : null;
  const viewport =
    selected !== null
      ? viewportForRegion(session, session.regions[selected])
      : { start: 0, end: session.record_duration || 1 };
  return {
    session,
    rawText: text,
    appliedEdits: 0,
    selectedRegion: selected,
    viewport,
    record: null,
  };
}

export function selectRegion(state: ViewState, index: number): ViewState {
  if (index < 0 || index >= state.session.regions.length) {
    return state;
  }
  return {
    ...state,
    selectedRegion: index,
    viewport: viewportForRegion(state.session, state.session.regions[index]),
  };
}

export function setViewport(
  state: ViewState, start: number, end: number,
): ViewState {
  const duration = Math.max(state.session.record_duration, 1e-9);
  const clampedStart = Math.max(0, Math.min(start, duration));
  const clampedEnd = Math.max(clampedStart + 1e-6, Math.min(end, duration));
  return { ...state, viewport: { start: clampedStart, end: clampedEnd } };
}

/** Apply one edit; returns the new state (throws without changes when
 * the edit is invalid). */
export function applyEditToState(state: ViewState, input: EditInput): ViewState {
  const session = applyEdit(state.session, input);
  return {
    ...state,
    session,
    appliedEdits: state.appliedEdits + 1,
    // region indices may shift on region removal; keep selection sane
    selectedRegion:
      state.selectedRegion !== null &&
      state.selectedRegion < session.regions.length
        ? state.selectedRegion
        : session.regions.length
          ? 0
          : null,
  };
}

/** Serialize the reviewed session. A pristine state returns the input
 * bytes unchanged. */
export function exportEdited(state: ViewState): string {
  if (state.appliedEdits === 0) {
    return state.rawText;
  }
  return serializeSession(state.session);
}

/** Per-region count of manual edits whose target lies inside it. */
export function editCountsByRegion(session: Session): number[] {
  return session.regions.map((region) => {
    let count = 0;
    for (const edit of session.edits) {
      const t = edit.target_time;
      if (t !== null && t >= region.start && t <= region.end) count += 1;
    }
    return count;
  });
}
