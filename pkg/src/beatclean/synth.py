"""Synthetic ECG and RRI generators for tests and demos.

The waveform model places Gaussian bumps (P, Q, R, S, T) around each
scheduled beat time, which is enough structure for the detector, the
P-wave rules and the noise profiler to act on, with exactly known
ground-truth beat times.
"""

from __future__ import annotations

import numpy as np

from .model import (
    BeatClass,
    BeatMark,
    EcgRecord,
    PipelineParams,
    Session,
    SourceFormat,
)
from .io import RRI_ONLY_SAMPLE_RATE

#: (offset s, width s, relative amplitude) of each wave component.
_WAVES = (
    (-0.160, 0.022, 0.15),   # P
    (-0.030, 0.008, -0.12),  # Q
    (0.000, 0.010, 1.00),    # R
    (0.030, 0.009, -0.20),   # S
    (0.280, 0.060, 0.30),    # T
)


def rri_to_times(rri, t0: float = 0.0) -> np.ndarray:
    """Cumulative beat times from an interval sequence."""
    rri = np.asarray(rri, dtype=np.float64)
    return t0 + np.concatenate(([0.0], np.cumsum(rri)))


def synthetic_ecg(
    beat_times,
    sample_rate: float = 250.0,
    duration: float | None = None,
    amplitude_mv: float = 1.0,
    p_amplitude: float | None = None,
    t_amplitude: float | None = None,
    noise_std: float = 0.0,
    baseline_amplitude: float = 0.0,
    baseline_freq: float = 0.25,
    seed: int | None = None,
) -> EcgRecord:
    """Render a waveform with QRS complexes at the given times.

    ``p_amplitude``/``t_amplitude`` override the default P and T bump
    heights (0 suppresses the wave entirely); ``noise_std`` adds white
    noise and ``baseline_amplitude`` a slow sinusoidal wander.
    """
    beat_times = np.asarray(beat_times, dtype=np.float64)
    if duration is None:
        duration = float(beat_times[-1]) + 1.0 if beat_times.size else 1.0
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    x = np.zeros(n)
    for offset, width, rel in _WAVES:
        amp = rel * amplitude_mv
        if offset == -0.160 and p_amplitude is not None:
            amp = p_amplitude
        if offset == 0.280 and t_amplitude is not None:
            amp = t_amplitude
        if amp == 0.0:
            continue
        for bt in beat_times:
            centre = bt + offset
            lo = np.searchsorted(t, centre - 8 * width)
            hi = np.searchsorted(t, centre + 8 * width)
            if hi > lo:
                dt = t[lo:hi] - centre
                x[lo:hi] += amp * np.exp(-0.5 * (dt / width) ** 2)
    if baseline_amplitude:
        x += baseline_amplitude * np.sin(2 * np.pi * baseline_freq * t)
    if noise_std:
        rng = np.random.default_rng(seed)
        x += rng.normal(0.0, noise_std, n)
    return EcgRecord(
        samples=x, sample_rate=sample_rate, source_format=SourceFormat.TXT
    )


def steady_rri(count: int, interval: float = 0.8) -> np.ndarray:
    return np.full(count, interval, dtype=np.float64)


def session_from_rri(
    rri,
    t0: float = 0.0,
    params: PipelineParams | None = None,
) -> Session:
    """Interval-only session with every beat initially included."""
    times = rri_to_times(rri, t0)
    beats = [BeatMark(time=float(t), klass=BeatClass.INCLUDED) for t in times]
    rri = np.asarray(rri, dtype=np.float64)
    return Session(
        sample_rate=RRI_ONLY_SAMPLE_RATE,
        source_format=SourceFormat.RRI_ONLY,
        record_duration=float(times[-1]),
        params=params or PipelineParams(),
        beats=beats,
        rri_input=[float(v) for v in rri],
    )
