/** Session file schema (version 1) as TypeScript types.
 *
 * Mirrors docs/session_schema.md in the repository root; field names
 * are frozen there.
 */

export type BeatClass =
  | "INCLUDED"
  | "EXCLUDED"
  | "ADJUSTED"
  | "INTERPOLATED"
  | "REMOVED"
  | "TRAINING";

export type Provenance = "DETECTOR" | "CORRECTION" | "MANUAL";

export type PwaveState = "YES" | "NO" | "UNEVALUATED";

export type RegionReason = "TRAINING" | "IRREGULAR" | "NOISE" | "MANUAL";

export type SourceFormat = "TXT" | "EDF" | "BDF" | "WFDB" | "RRI_ONLY";

export type EditKind =
  | "DELETE"
  | "ADD"
  | "INTERPOLATE"
  | "RELOCATE"
  | "INVERT_SIGNAL"
  | "REGION_OVERRIDE";

export interface Beat {
  t: number;
  class: BeatClass;
  reason: string | null;
  prov: Provenance;
  pwave: PwaveState;
  noise: number;
}

export interface Region {
  start: number;
  end: number;
  reason: RegionReason;
}

export interface EditEntry {
  ordinal: number;
  kind: EditKind;
  target_time: number | null;
  target_index: number | null;
  params: Record<string, number | string>;
  timestamp: string;
}

export interface SessionParams {
  qrs_threshold: number;
  post_threshold: number;
  amplifier: number;
  invert: boolean;
  rri_upper_frac: number;
  rri_lower_frac: number;
  grad_inc_frac: number;
  grad_dec_frac: number;
  hard_upper_bound: number;
  accept_min: number;
  accept_max: number;
  loops: number;
  analyze_pwaves: boolean;
  pwave_sensitivity: number;
  noise_window_ms: number;
}

export interface Session {
  version: number;
  sample_rate: number;
  source_format: SourceFormat;
  record_path: string | null;
  record_duration: number;
  start_offset: number;
  inverted: boolean;
  params: SessionParams;
  test_region: [number, number] | null;
  beats: Beat[];
  rri_input: number[] | null;
  regions: Region[];
  edits: EditEntry[];
  validation: Record<string, unknown> | null;
}

/** Beats with these classes make up the output RRI series. */
export const VALID_CLASSES: ReadonlySet<BeatClass> = new Set([
  "INCLUDED",
  "ADJUSTED",
  "INTERPOLATED",
]);

export function isValidBeat(beat: Beat): boolean {
  return VALID_CLASSES.has(beat.class);
}

/** Beats still part of the tachogram (everything except REMOVED). */
export function activeBeats(session: Session): Beat[] {
  return session.beats.filter((b) => b.class !== "REMOVED");
}

/** One sample period in seconds: the minimum spacing for added beats. */
export function samplePeriod(session: Session): number {
  return 1.0 / session.sample_rate;
}
