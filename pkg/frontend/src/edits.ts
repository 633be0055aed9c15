/** Manual edit operations over a session.
 *
 * Every operation is pure: it returns a new session with the change
 * applied and the corresponding entry appended to the edit log, so
 * replaying the log over the original session reproduces the edited
 * session exactly.
 */

import type { Beat, EditEntry, EditKind, Region, Session } from "./types.js";
import { samplePeriod } from "./types.js";

export class InvalidTarget extends Error {
  constructor(message: string) {
    super(message);
    this.name = "InvalidTarget";
  }
}

export class NonMonotonicTime extends Error {
  constructor(message: string) {
    super(message);
    this.name = "NonMonotonicTime";
  }
}

/** Edit request: the log entry minus ordinal (assigned on append). */
export interface EditInput {
  kind: EditKind;
  target_time?: number | null;
  target_index?: number | null;
  params?: Record<string, number | string>;
  timestamp?: string;
}

function cloneSession(session: Session): Session {
  return {
    ...session,
    params: { ...session.params },
    beats: session.beats.map((b) => ({ ...b })),
    regions: session.regions.map((r) => ({ ...r })),
    edits: session.edits.map((e) => ({ ...e, params: { ...e.params } })),
    rri_input: session.rri_input ? [...session.rri_input] : null,
    test_region: session.test_region ? [...session.test_region] : null,
    validation: session.validation ? { ...session.validation } : null,
  };
}

function findBeat(session: Session, time: number | null | undefined): number {
  if (time === null || time === undefined) {
    throw new InvalidTarget("edit needs a target beat time");
  }
  // exact match first, then within half a sample period (log replay
  // stores the exact recorded time, so exact lookup is the common case)
  let best = -1;
  let bestDistance = Infinity;
  for (let i = 0; i < session.beats.length; i++) {
    if (session.beats[i].class === "REMOVED") continue;
    const distance = Math.abs(session.beats[i].t - time);
    if (distance < bestDistance) {
      best = i;
      bestDistance = distance;
    }
  }
  if (best < 0 || bestDistance > samplePeriod(session) / 2) {
    throw new InvalidTarget(`no beat at ${time}`);
  }
  return best;
}

function neighbours(session: Session, index: number): [number, number] {
  let left = -Infinity;
  for (let i = index - 1; i >= 0; i--) {
    if (session.beats[i].class !== "REMOVED") {
      left = session.beats[i].t;
      break;
    }
  }
  let right = Infinity;
  for (let i = index + 1; i < session.beats.length; i++) {
    if (session.beats[i].class !== "REMOVED") {
      right = session.beats[i].t;
      break;
    }
  }
  return [left, right];
}

function insertBeat(session: Session, beat: Beat): void {
  let at = session.beats.length;
  for (let i = 0; i < session.beats.length; i++) {
    if (session.beats[i].t > beat.t) {
      at = i;
      break;
    }
  }
  session.beats.splice(at, 0, beat);
}

function requireNumber(
  params: Record<string, number | string>, key: string,
): number {
  const value = params[key];
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new InvalidTarget(`edit parameter ${key} must be a number`);
  }
  return value;
}

/** Apply one edit and append it to the log. Throws InvalidTarget /
 * NonMonotonicTime without modifying the input session. */
export function applyEdit(session: Session, input: EditInput): Session {
  const out = cloneSession(session);
  const params = input.params ?? {};
  const entry: EditEntry = {
    ordinal: session.edits.length,
    kind: input.kind,
    target_time: input.target_time ?? null,
    target_index: input.target_index ?? null,
    params: { ...params },
    timestamp: input.timestamp ?? "",
  };

  switch (input.kind) {
    case "DELETE": {
      const index = findBeat(out, input.target_time);
      const beat = out.beats[index];
      beat.class = "REMOVED";
      beat.reason = "MANUAL";
      beat.prov = "MANUAL";
      break;
    }
    case "ADD": {
      const t = input.target_time;
      if (t === null || t === undefined || !Number.isFinite(t)) {
        throw new InvalidTarget("ADD needs a time");
      }
      const period = samplePeriod(out);
      for (const beat of out.beats) {
        if (beat.class !== "REMOVED" && Math.abs(beat.t - t) < period) {
          throw new InvalidTarget(
            `a beat already exists within one sample period of ${t}`,
          );
        }
      }
      insertBeat(out, {
        t,
        class: "INCLUDED",
        reason: "MANUAL",
        prov: "MANUAL",
        pwave: "UNEVALUATED",
        noise: 0.0,
      });
      break;
    }
    case "INTERPOLATE": {
      const index = findBeat(out, input.target_time);
      const count = Math.round(requireNumber(params, "count"));
      if (count < 1) throw new InvalidTarget("count must be >= 1");
      const [, right] = neighbours(out, index);
      if (!Number.isFinite(right)) {
        throw new InvalidTarget("no interval after the selected beat");
      }
      const left = out.beats[index].t;
      const piece = (right - left) / (count + 1);
      for (let k = 1; k <= count; k++) {
        insertBeat(out, {
          t: left + k * piece,
          class: "INTERPOLATED",
          reason: "MANUAL",
          prov: "MANUAL",
          pwave: "UNEVALUATED",
          noise: 0.0,
        });
      }
      break;
    }
    case "RELOCATE": {
      const index = findBeat(out, input.target_time);
      const to = requireNumber(params, "to");
      const [left, right] = neighbours(out, index);
      if (!(to > left && to < right)) {
        throw new NonMonotonicTime(
          `time ${to} not strictly between neighbours (${left}, ${right})`,
        );
      }
      const beat = out.beats[index];
      beat.t = to;
      beat.class = "ADJUSTED";
      beat.reason = "MANUAL";
      beat.prov = "MANUAL";
      break;
    }
    case "INVERT_SIGNAL": {
      out.inverted = !out.inverted;
      break;
    }
    case "REGION_OVERRIDE": {
      const action = params.action;
      if (action === "add") {
        const start = requireNumber(params, "start");
        const end = requireNumber(params, "end");
        if (!(start < end)) {
          throw new InvalidTarget(`region start ${start} must precede ${end}`);
        }
        const region: Region = { start, end, reason: "MANUAL" };
        let at = out.regions.length;
        for (let i = 0; i < out.regions.length; i++) {
          if (out.regions[i].start > start) {
            at = i;
            break;
          }
        }
        out.regions.splice(at, 0, region);
      } else if (action === "remove") {
        const index = input.target_index;
        if (
          index === null ||
          index === undefined ||
          index < 0 ||
          index >= out.regions.length
        ) {
          throw new InvalidTarget(`no region ${String(index)}`);
        }
        out.regions.splice(index, 1);
      } else {
        throw new InvalidTarget(`unknown region action ${String(action)}`);
      }
      break;
    }
    default:
      throw new InvalidTarget(`unknown edit kind ${String(input.kind)}`);
  }

  out.edits.push(entry);
  return out;
}

/** Replay a log over a base session; reproduces the edited session. */
export function replayLog(base: Session, log: EditEntry[]): Session {
  let current = base;
  for (const entry of log) {
    current = applyEdit(current, {
      kind: entry.kind,
      target_time: entry.target_time,
      target_index: entry.target_index,
      params: entry.params,
      timestamp: entry.timestamp,
    });
  }
  return current;
}
