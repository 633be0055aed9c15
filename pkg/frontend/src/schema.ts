/** Session parsing and serialization with path-aware errors. */

import type {
  Beat,
  EditEntry,
  Region,
  Session,
  SessionParams,
} from "./types.js";

export const SESSION_VERSION = 1;

/** Schema violation, carrying the path of the offending field. */
export class SchemaError extends Error {
  constructor(public path: string, message: string) {
    super(`${path}: ${message}`);
    this.name = "SchemaError";
  }
}

const BEAT_CLASSES = new Set([
  "INCLUDED", "EXCLUDED", "ADJUSTED", "INTERPOLATED", "REMOVED", "TRAINING",
]);
const PROVENANCES = new Set(["DETECTOR", "CORRECTION", "MANUAL"]);
const PWAVES = new Set(["YES", "NO", "UNEVALUATED"]);
const REGION_REASONS = new Set(["TRAINING", "IRREGULAR", "NOISE", "MANUAL"]);
const SOURCE_FORMATS = new Set(["TXT", "EDF", "BDF", "WFDB", "RRI_ONLY"]);
const EDIT_KINDS = new Set([
  "DELETE", "ADD", "INTERPOLATE", "RELOCATE", "INVERT_SIGNAL",
  "REGION_OVERRIDE",
]);

function need(value: unknown, path: string): unknown {
  if (value === undefined) throw new SchemaError(path, "missing field");
  return value;
}

function asNumber(value: unknown, path: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new SchemaError(path, `expected a finite number, got ${String(value)}`);
  }
  return value;
}

function asBoolean(value: unknown, path: string): boolean {
  if (typeof value !== "boolean") {
    throw new SchemaError(path, "expected a boolean");
  }
  return value;
}

function asStringIn(value: unknown, allowed: Set<string>, path: string): string {
  if (typeof value !== "string" || !allowed.has(value)) {
    throw new SchemaError(path, `expected one of ${[...allowed].join("/")}`);
  }
  return value;
}

function asObject(value: unknown, path: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new SchemaError(path, "expected an object");
  }
  return value as Record<string, unknown>;
}

function asArray(value: unknown, path: string): unknown[] {
  if (!Array.isArray(value)) throw new SchemaError(path, "expected an array");
  return value;
}

const PARAM_NUMBERS: (keyof SessionParams)[] = [
  "qrs_threshold", "post_threshold", "amplifier", "rri_upper_frac",
  "rri_lower_frac", "grad_inc_frac", "grad_dec_frac", "hard_upper_bound",
  "accept_min", "accept_max", "loops", "pwave_sensitivity",
  "noise_window_ms",
];

function parseParams(raw: unknown, path: string): SessionParams {
  const obj = asObject(raw, path);
  const out: Record<string, number | boolean> = {};
  for (const key of PARAM_NUMBERS) {
    out[key] = asNumber(need(obj[key], `${path}.${key}`), `${path}.${key}`);
  }
  out.invert = asBoolean(need(obj.invert, `${path}.invert`), `${path}.invert`);
  out.analyze_pwaves = asBoolean(
    need(obj.analyze_pwaves, `${path}.analyze_pwaves`),
    `${path}.analyze_pwaves`,
  );
  return out as unknown as SessionParams;
}

function parseBeat(raw: unknown, path: string): Beat {
  const obj = asObject(raw, path);
  return {
    t: asNumber(need(obj.t, `${path}.t`), `${path}.t`),
    class: asStringIn(
      need(obj.class, `${path}.class`), BEAT_CLASSES, `${path}.class`,
    ) as Beat["class"],
    reason:
      obj.reason === null || obj.reason === undefined
        ? null
        : String(obj.reason),
    prov: asStringIn(
      need(obj.prov, `${path}.prov`), PROVENANCES, `${path}.prov`,
    ) as Beat["prov"],
    pwave: asStringIn(
      need(obj.pwave, `${path}.pwave`), PWAVES, `${path}.pwave`,
    ) as Beat["pwave"],
    noise: asNumber(need(obj.noise, `${path}.noise`), `${path}.noise`),
  };
}

function parseRegion(raw: unknown, path: string): Region {
  const obj = asObject(raw, path);
  const start = asNumber(need(obj.start, `${path}.start`), `${path}.start`);
  const end = asNumber(need(obj.end, `${path}.end`), `${path}.end`);
  if (!(start < end)) {
    throw new SchemaError(path, `region start ${start} must precede end ${end}`);
  }
  return {
    start,
    end,
    reason: asStringIn(
      need(obj.reason, `${path}.reason`), REGION_REASONS, `${path}.reason`,
    ) as Region["reason"],
  };
}

function parseEdit(raw: unknown, path: string): EditEntry {
  const obj = asObject(raw, path);
  return {
    ordinal: asNumber(need(obj.ordinal, `${path}.ordinal`), `${path}.ordinal`),
    kind: asStringIn(
      need(obj.kind, `${path}.kind`), EDIT_KINDS, `${path}.kind`,
    ) as EditEntry["kind"],
    target_time:
      obj.target_time === null || obj.target_time === undefined
        ? null
        : asNumber(obj.target_time, `${path}.target_time`),
    target_index:
      obj.target_index === null || obj.target_index === undefined
        ? null
        : asNumber(obj.target_index, `${path}.target_index`),
    params: asObject(obj.params ?? {}, `${path}.params`) as EditEntry["params"],
    timestamp: String(obj.timestamp ?? ""),
  };
}

/** Parse and validate a session file. */
export function parseSession(text: string): Session {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new SchemaError("$", `not valid JSON: ${(err as Error).message}`);
  }
  const obj = asObject(raw, "$");
  const version = asNumber(need(obj.version, "$.version"), "$.version");
  if (version !== SESSION_VERSION) {
    throw new SchemaError(
      "$.version",
      `unsupported session version ${version} (expected ${SESSION_VERSION})`,
    );
  }
  const beats = asArray(need(obj.beats, "$.beats"), "$.beats").map(
    (b, i) => parseBeat(b, `$.beats[${i}]`),
  );
  for (let i = 1; i < beats.length; i++) {
    if (!(beats[i].t > beats[i - 1].t)) {
      throw new SchemaError(
        `$.beats[${i}].t`,
        "beat times must be strictly increasing",
      );
    }
  }
  let testRegion: [number, number] | null = null;
  if (obj.test_region !== null && obj.test_region !== undefined) {
    const arr = asArray(obj.test_region, "$.test_region");
    if (arr.length !== 2) {
      throw new SchemaError("$.test_region", "expected [start, end]");
    }
    testRegion = [
      asNumber(arr[0], "$.test_region[0]"),
      asNumber(arr[1], "$.test_region[1]"),
    ];
  }
  return {
    version: SESSION_VERSION,
    sample_rate: asNumber(
      need(obj.sample_rate, "$.sample_rate"), "$.sample_rate",
    ),
    source_format: asStringIn(
      need(obj.source_format, "$.source_format"),
      SOURCE_FORMATS,
      "$.source_format",
    ) as Session["source_format"],
    record_path:
      obj.record_path === null || obj.record_path === undefined
        ? null
        : String(obj.record_path),
    record_duration: asNumber(
      need(obj.record_duration, "$.record_duration"), "$.record_duration",
    ),
    start_offset: asNumber(
      need(obj.start_offset, "$.start_offset"), "$.start_offset",
    ),
    inverted: asBoolean(need(obj.inverted, "$.inverted"), "$.inverted"),
    params: parseParams(need(obj.params, "$.params"), "$.params"),
    test_region: testRegion,
    beats,
    rri_input:
      obj.rri_input === null || obj.rri_input === undefined
        ? null
        : asArray(obj.rri_input, "$.rri_input").map((v, i) =>
            asNumber(v, `$.rri_input[${i}]`),
          ),
    regions: asArray(need(obj.regions, "$.regions"), "$.regions").map(
      (r, i) => parseRegion(r, `$.regions[${i}]`),
    ),
    edits: asArray(need(obj.edits, "$.edits"), "$.edits").map((e, i) =>
      parseEdit(e, `$.edits[${i}]`),
    ),
    validation:
      obj.validation === null || obj.validation === undefined
        ? null
        : asObject(obj.validation, "$.validation"),
  };
}

/** Serialize like the reference writer: keys sorted, one-space indent.
 * Any JSON parser reads it back; byte identity with an unedited input
 * is handled upstream by returning the original text. */
export function serializeSession(session: Session): string {
  return emit(toPlain(session), 0) + "\n";
}

function toPlain(session: Session): unknown {
  return {
    version: session.version,
    sample_rate: session.sample_rate,
    source_format: session.source_format,
    record_path: session.record_path,
    record_duration: session.record_duration,
    start_offset: session.start_offset,
    inverted: session.inverted,
    params: session.params,
    test_region: session.test_region,
    beats: session.beats,
    rri_input: session.rri_input,
    regions: session.regions,
    edits: session.edits,
    validation: session.validation,
  };
}

function emit(value: unknown, depth: number): string {
  const pad = " ".repeat(depth + 1);
  const close = " ".repeat(depth);
  if (value === null || value === undefined) return "null";
  if (typeof value === "number" || typeof value === "boolean") {
    return JSON.stringify(value);
  }
  if (typeof value === "string") return JSON.stringify(value);
  if (Array.isArray(value)) {
    if (value.length === 0) return "[]";
    const items = value.map((v) => pad + emit(v, depth + 1));
    return "[\n" + items.join(",\n") + "\n" + close + "]";
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
  if (entries.length === 0) return "{}";
  const items = entries.map(
    ([k, v]) => pad + JSON.stringify(k) + ": " + emit(v, depth + 1),
  );
  return "{\n" + items.join(",\n") + "\n" + close + "}";
}
