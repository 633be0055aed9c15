/** Record-parsing worker: keeps multi-hour file decoding off the UI
 * thread and reports coarse progress. */

import { parseRecord } from "./record.js";

interface ParseRequest {
  name: string;
  buffer: ArrayBuffer;
}

self.onmessage = (event: MessageEvent<ParseRequest>) => {
  const { name, buffer } = event.data;
  const post = self.postMessage.bind(self);
  try {
    post({ type: "progress", fraction: 0.1, note: "decoding" });
    const waveform = parseRecord(name, buffer);
    post({ type: "progress", fraction: 0.9, note: "transferring" });
    post(
      {
        type: "done",
        samples: waveform.samples,
        sampleRate: waveform.sampleRate,
      },
      // transfer the buffer instead of copying it
      [waveform.samples.buffer] as any,
    );
  } catch (err) {
    post({ type: "error", message: (err as Error).message });
  }
};
