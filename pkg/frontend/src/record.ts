/** Raw waveform loading for display: text (fs= header), EDF and BDF.
 *
 * The viewer works without a waveform (tachogram and regions come from
 * the session); these parsers only feed the two waveform panels.
 */

export interface Waveform {
  samples: Float64Array;
  sampleRate: number;
}

export class RecordParseError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "RecordParseError";
  }
}

export function parseTextRecord(text: string): Waveform {
  let sampleRate: number | null = null;
  const values: number[] = [];
  for (const raw of text.split(/\r?\n/)) {
    const line = raw.trim();
    if (!line || line.startsWith("#")) continue;
    const fs = line.match(/^fs\s*=\s*([0-9.eE+-]+)$/);
    if (fs) {
      sampleRate = Number(fs[1]);
      continue;
    }
    const value = Number(line.split(/\s+/)[0]);
    if (!Number.isFinite(value)) {
      throw new RecordParseError(`not a sample value: ${line}`);
    }
    values.push(value);
  }
  if (sampleRate === null || !(sampleRate > 0)) {
    throw new RecordParseError("text record needs an fs=<Hz> header line");
  }
  if (!values.length) throw new RecordParseError("no samples");
  return { samples: Float64Array.from(values), sampleRate };
}

function ascii(view: DataView, offset: number, length: number): string {
  let out = "";
  for (let i = 0; i < length; i++) {
    out += String.fromCharCode(view.getUint8(offset + i));
  }
  return out.trim();
}

/** Parse EDF (16-bit) or BDF (24-bit) and return the first ECG-labelled
 * channel, or channel 0 when none is labelled. */
export function parseEdf(buffer: ArrayBuffer): Waveform {
  const view = new DataView(buffer);
  if (buffer.byteLength < 256) throw new RecordParseError("truncated header");
  const bdf = view.getUint8(0) === 0xff && ascii(view, 1, 7) === "BIOSEMI";
  if (!bdf && ascii(view, 0, 8) !== "0") {
    throw new RecordParseError("not an EDF/BDF file");
  }
  let nRecords = Number(ascii(view, 236, 8));
  const recordDuration = Number(ascii(view, 244, 8));
  const nSignals = Number(ascii(view, 252, 4));
  if (!(nSignals > 0) || !(recordDuration > 0)) {
    throw new RecordParseError("invalid header layout fields");
  }
  const sig = 256;
  const field = (offset: number, width: number, i: number) =>
    ascii(view, sig + offset * nSignals + i * width, width);
  const labels: string[] = [];
  const physMin: number[] = [];
  const physMax: number[] = [];
  const digMin: number[] = [];
  const digMax: number[] = [];
  const samplesPerRecord: number[] = [];
  for (let i = 0; i < nSignals; i++) {
    labels.push(field(0, 16, i));
    physMin.push(Number(field(104, 8, i)));
    physMax.push(Number(field(112, 8, i)));
    digMin.push(Number(field(120, 8, i)));
    digMax.push(Number(field(128, 8, i)));
    samplesPerRecord.push(Number(field(216, 8, i)));
  }
  let channel = 0;
  for (let i = 0; i < nSignals; i++) {
    const label = labels[i].toUpperCase();
    if (label.includes("ECG") || label.includes("EKG")) {
      channel = i;
      break;
    }
  }
  const word = bdf ? 3 : 2;
  const headerBytes = 256 * (nSignals + 1);
  const recordBytes = samplesPerRecord.reduce((a, b) => a + b, 0) * word;
  if (nRecords < 0) {
    nRecords = Math.floor((buffer.byteLength - headerBytes) / recordBytes);
  }
  let channelOffset = 0;
  for (let i = 0; i < channel; i++) channelOffset += samplesPerRecord[i] * word;
  const spr = samplesPerRecord[channel];
  const digital = new Float64Array(nRecords * spr);
  for (let r = 0; r < nRecords; r++) {
    const base = headerBytes + r * recordBytes + channelOffset;
    for (let k = 0; k < spr; k++) {
      if (bdf) {
        let v =
          view.getUint8(base + 3 * k) |
          (view.getUint8(base + 3 * k + 1) << 8) |
          (view.getUint8(base + 3 * k + 2) << 16);
        if (v >= 1 << 23) v -= 1 << 24;
        digital[r * spr + k] = v;
      } else {
        digital[r * spr + k] = view.getInt16(base + 2 * k, true);
      }
    }
  }
  const scale = (physMax[channel] - physMin[channel]) / (digMax[channel] - digMin[channel]);
  const samples = new Float64Array(digital.length);
  for (let i = 0; i < digital.length; i++) {
    samples[i] = physMin[channel] + (digital[i] - digMin[channel]) * scale;
  }
  return { samples, sampleRate: spr / recordDuration };
}

export function parseRecord(name: string, buffer: ArrayBuffer): Waveform {
  const lower = name.toLowerCase();
  if (lower.endsWith(".edf") || lower.endsWith(".bdf")) {
    return parseEdf(buffer);
  }
  return parseTextRecord(new TextDecoder().decode(buffer));
}
