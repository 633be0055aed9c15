"""Per-beat noise profiling from the variance of the signal derivative.

Each beat's profile value is the variance of the first-difference
(scaled to a derivative) over a window around the beat. Values scale
with the square of the signal amplitude and are insensitive to offsets,
which makes the relative 120 % comparison below amplitude-free.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .exceptions import NoSamples
from .model import BeatMark, EcgRecord

#: Default half-window around each beat, milliseconds.
DEFAULT_WINDOW_MS = 200.0

#: Neighbours on each side feeding a beat's regional noise mean.
NOISE_WINDOW_BEATS = 20


@dataclass
class NoiseProfile:
    """Noise values aligned 1:1 with a session's beats."""

    per_beat: np.ndarray
    window_ms: float

    def __len__(self) -> int:
        return int(self.per_beat.size)


def compute_noise_profile(
    record: EcgRecord, beats: list[BeatMark], window_ms: float = DEFAULT_WINDOW_MS
) -> NoiseProfile:
    """Variance of the signal derivative around each beat.

    The window spans ``[t - window, t + window]`` truncated at record
    boundaries; windows with fewer than two samples yield 0.
    """
    if not record.has_waveform:
        raise NoSamples("noise profiling needs waveform samples")
    if window_ms <= 0:
        raise ValueError("window_ms must be positive")
    fs = record.sample_rate
    x = record.samples
    half = window_ms / 1000.0
    values = np.zeros(len(beats))
    for i, beat in enumerate(beats):
        lo = max(0, int(round((beat.time - half) * fs)))
        hi = min(x.size, int(round((beat.time + half) * fs)) + 1)
        if hi - lo < 2:
            continue
        derivative = np.diff(x[lo:hi]) * fs
        values[i] = float(np.var(derivative))
    return NoiseProfile(per_beat=values, window_ms=window_ms)


def regional_noise_means(
    profile: NoiseProfile,
    upper_frac: float = 1.2,
    window: int = NOISE_WINDOW_BEATS,
) -> np.ndarray:
    """Per-beat reference level for the noisy-beat comparison.

    A causal scan keeps the mean of the last ``window`` beats that were
    not themselves above ``upper_frac`` times the running mean, seeded
    from the record's opening (training) beats. Flagged beats never
    enter the mean, so a long noisy stretch is measured against the
    clean level before it rather than against itself.
    """
    values = profile.per_beat
    n = values.size
    means = np.zeros(n)
    if n == 0:
        return means
    seed = float(np.median(values[: min(window, n)]))
    recent: deque[float] = deque(maxlen=window)
    for i in range(n):
        mean = float(np.mean(recent)) if recent else seed
        means[i] = mean
        if mean <= 0 or not values[i] > upper_frac * mean:
            recent.append(float(values[i]))
    return means


def classify_noise(
    profile: NoiseProfile,
    regional_means: np.ndarray,
    upper_frac: float = 1.2,
) -> np.ndarray:
    """Flag beats whose profile value strictly exceeds ``upper_frac``
    times their regional noise mean.

    Low values are deliberately not flagged: an unusually flat window
    means absent signal, which the detector already expresses by finding
    no beats there. Flags corroborate the interval rules downstream and
    never exclude a beat with a valid RRI pattern on their own.
    """
    values = profile.per_beat
    if values.size != np.asarray(regional_means).size:
        raise ValueError("profile and regional means must align")
    means = np.asarray(regional_means, dtype=np.float64)
    flags = (means > 0) & (values > upper_frac * means)
    return flags
