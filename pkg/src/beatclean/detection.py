"""QRS detection: band-pass conditioning, adaptive-threshold peak
picking with search-back, and a predictivity post filter.

The detector is scale-free: every threshold is derived from running
signal statistics, so multiplying the input by any positive constant
leaves the detected beat times unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .exceptions import EmptySignal
from .model import BeatClass, BeatMark, DetectorParams, EcgRecord, MarkReason

#: QRS energy band (Hz) for the zero-phase band-pass stage.
BAND_LOW_HZ = 5.0
BAND_HIGH_HZ = 15.0

#: Physiological refractory period between QRS complexes.
REFRACTORY_S = 0.200

#: Moving-average window for the rectified-energy signal.
INTEGRATION_S = 0.150

#: Beat times are refined to the strongest raw-signal deflection
#: within this radius of the energy peak.
REFINE_RADIUS_S = 0.050

#: A gap longer than this multiple of the running RR median triggers a
#: search-back pass at half threshold.
SEARCHBACK_FACTOR = 1.66

#: Beats on each side contributing to the post filter's running median.
POST_MEDIAN_HALF_WINDOW = 5


@dataclass
class FilteredSignal:
    """Conditioned waveform handed from :func:`preprocess` to the
    detection and classification stages."""

    samples: np.ndarray       # band-passed signal
    oriented: np.ndarray      # amplified/inverted raw signal, unfiltered
    sample_rate: float

    def __len__(self) -> int:
        return int(self.samples.size)


def preprocess(record: EcgRecord, params: DetectorParams) -> FilteredSignal:
    """Amplify, optionally invert, and band-pass the waveform.

    The band-pass (5-15 Hz, applied forward and backward for zero phase)
    removes baseline wander and mains interference while keeping the QRS
    energy band. Output length equals input length.
    """
    if not record.has_waveform:
        raise EmptySignal("record has no waveform samples")
    x = record.samples * params.amplifier
    if params.invert:
        x = -x
    fs = record.sample_rate
    nyquist = fs / 2.0
    high = min(BAND_HIGH_HZ, 0.9 * nyquist)
    low = min(BAND_LOW_HZ, 0.5 * high)
    sos = sps.butter(2, [low / nyquist, high / nyquist], btype="bandpass", output="sos")
    filtered = sps.sosfiltfilt(sos, x)
    return FilteredSignal(samples=filtered, oriented=x, sample_rate=fs)


def _energy(filtered: FilteredSignal) -> np.ndarray:
    """Rectified, integrated slope energy (same length as the input)."""
    fs = filtered.sample_rate
    slope = np.diff(filtered.samples, prepend=filtered.samples[:1])
    squared = slope * slope
    width = max(1, int(round(INTEGRATION_S * fs)))
    kernel = np.ones(width) / width
    return np.convolve(squared, kernel, mode="same")


def _refine_apex(oriented: np.ndarray, idx: int, radius: int) -> int:
    lo = max(0, idx - radius)
    hi = min(oriented.size, idx + radius + 1)
    window = oriented[lo:hi]
    deviation = np.abs(window - np.median(window))
    return lo + int(np.argmax(deviation))


def detect_qrs(filtered: FilteredSignal, params: DetectorParams) -> list[BeatMark]:
    """Locate QRS complexes in the conditioned signal.

    Candidate peaks of the energy signal are accepted against an
    adaptive threshold (running signal/noise level estimates, scaled by
    ``qrs_threshold``), with a 200 ms refractory period and a half-
    threshold search-back pass for long gaps. Accepted peaks are refined
    to the strongest raw deflection within +/-50 ms.
    """
    if len(filtered) == 0:
        raise EmptySignal("empty filtered signal")
    fs = filtered.sample_rate
    energy = _energy(filtered)
    refractory = max(1, int(round(REFRACTORY_S * fs)))
    peaks, _ = sps.find_peaks(energy, distance=refractory)
    if peaks.size == 0:
        return []

    init = energy[: min(energy.size, int(round(2 * fs)) + 1)]
    signal_level = 0.875 * float(np.max(init))
    noise_level = 0.5 * float(np.mean(init))
    if signal_level <= 0:  # flat start; fall back to whole-record levels
        signal_level = 0.875 * float(np.max(energy))
        noise_level = 0.5 * float(np.mean(energy))
    if signal_level <= 0:
        return []

    accepted: list[int] = []
    rejected: list[int] = []
    thresholds = np.empty(peaks.size)
    for k, p in enumerate(peaks):
        threshold = noise_level + 0.25 * (signal_level - noise_level)
        thresholds[k] = threshold
        height = energy[p]
        if height > params.qrs_threshold * threshold and (
            not accepted or p - accepted[-1] >= refractory
        ):
            accepted.append(int(p))
            signal_level = 0.125 * height + 0.875 * signal_level
        else:
            rejected.append(k)
            noise_level = 0.125 * height + 0.875 * noise_level

    # search-back: re-examine rejected candidates inside long RR gaps
    if len(accepted) >= 2:
        rr = np.diff(accepted)
        rescued: list[int] = []
        for k in rejected:
            p = peaks[k]
            pos = np.searchsorted(accepted, p)
            if pos == 0 or pos == len(accepted):
                continue
            gap = accepted[pos] - accepted[pos - 1]
            recent = rr[max(0, pos - 9) : pos]
            typical = float(np.median(recent)) if recent.size else gap
            if gap <= SEARCHBACK_FACTOR * typical:
                continue
            if energy[p] > 0.5 * params.qrs_threshold * thresholds[k] and (
                p - accepted[pos - 1] >= refractory
                and accepted[pos] - p >= refractory
            ):
                rescued.append(int(p))
        if rescued:
            accepted = sorted(set(accepted) | set(rescued))

    # refine to the raw apex, then drop refinement collisions
    radius = max(1, int(round(REFINE_RADIUS_S * fs)))
    refined: list[tuple[int, float]] = []
    for p in accepted:
        idx = _refine_apex(filtered.oriented, p, radius)
        refined.append((idx, float(energy[p])))
    refined.sort()
    kept: list[tuple[int, float]] = []
    for idx, height in refined:
        if kept and idx - kept[-1][0] < refractory:
            if height > kept[-1][1]:
                kept[-1] = (idx, height)
        else:
            kept.append((idx, height))

    return [
        BeatMark(time=idx / fs, klass=BeatClass.INCLUDED)
        for idx, _ in kept
    ]


def post_filter(
    beats: list[BeatMark], filtered: FilteredSignal, params: DetectorParams
) -> list[BeatMark]:
    """Demote weak detections to EXCLUDED.

    Each beat's score is its local energy maximum; a beat is demoted
    when its score falls strictly below ``post_threshold`` times the
    running median score of its neighbours. Beats are never deleted or
    reordered here so later stages can still rescue or region-mark them.
    """
    if not beats or params.post_threshold == 0:
        return [BeatMark(**vars(b)) for b in beats]
    fs = filtered.sample_rate
    energy = _energy(filtered)
    radius = max(1, int(round(0.075 * fs)))
    scores = np.empty(len(beats))
    for i, beat in enumerate(beats):
        idx = int(round(beat.time * fs))
        lo = max(0, idx - radius)
        hi = min(energy.size, idx + radius + 1)
        scores[i] = float(np.max(energy[lo:hi])) if hi > lo else 0.0

    out: list[BeatMark] = []
    half = POST_MEDIAN_HALF_WINDOW
    for i, beat in enumerate(beats):
        lo = max(0, i - half)
        hi = min(len(beats), i + half + 1)
        median = float(np.median(scores[lo:hi]))
        clone = BeatMark(**vars(beat))
        # the 1e-12 relative guard keeps scores that equal the median up
        # to accumulated rounding from flipping the strict comparison
        if scores[i] < params.post_threshold * median * (1.0 - 1e-12):
            clone.klass = BeatClass.EXCLUDED
            clone.reason = MarkReason.LOW_SCORE
        out.append(clone)
    return out
