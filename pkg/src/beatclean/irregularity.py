"""Outlier detection on the RRI series and decision rules for
classifying irregular beats.

Regional statistics are means over the up-to-20 interval durations on
each side of a beat. An interval is an outlier when it leaves the
80-120 % band around that mean or the absolute acceptance window.
Flagged beats then pass through an ordered rule list (adjust / exclude /
re-include) driven by P-wave presence, isolation and one-beat gradual
thresholds; whatever survives is handed to the correction stage.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import signal as sps

from .exceptions import EmptyWindow, WindowOutOfRange
from .model import (
    BeatClass,
    BeatMark,
    EcgRecord,
    IrregularityParams,
    MarkReason,
    Provenance,
    PwaveState,
    RriSeries,
    Session,
    VALID_CLASSES,
    build_rri,
)
from .noise import NoiseProfile, classify_noise, regional_noise_means

#: Interval durations on each side of a beat feeding its regional mean.
REGIONAL_WINDOW = 20

#: P-wave search window relative to the beat time, seconds.
PWAVE_WINDOW = (-0.250, -0.080)

#: Required prominence, in units of the baseline residual deviation
#: (the residual outside the candidate wave).
PWAVE_PROMINENCE_FACTOR = 2.0

#: Widest extremum (at half prominence) still accepted as a P-wave;
#: broader humps are detrending residue of neighbouring T-waves.
PWAVE_MAX_WIDTH_S = 0.090

#: Smoothing applied before the peak search, so isolated noise samples
#: cannot pose as wave candidates.
PWAVE_SMOOTH_S = 0.033

#: Samples this close to the candidate peak are part of the wave, not
#: of the baseline.
PWAVE_BASELINE_GAP_S = 0.045

#: Beat classes that count as settled neighbours for isolation checks.
_NEIGHBOUR_OK = VALID_CLASSES | {BeatClass.TRAINING}

#: Sticky exclusion reasons that later passes must not reopen.
_SETTLED = {MarkReason.PAIRED_ECTOPIC, MarkReason.SUDDEN_INCREASE, MarkReason.MANUAL}

#: Exclusion reasons still open for rescue or correction.
OPEN_EXCLUSIONS = {MarkReason.RRI_OUTLIER, MarkReason.LOW_SCORE}


@dataclass
class RegionalStats:
    """Regional reference levels around one beat."""

    rri_mean: float
    noise_mean: float
    lower_frac: float
    upper_frac: float


@dataclass
class OutlierFlags:
    """Outlier verdicts: per-interval RRI flags plus per-beat noise
    corroboration (indexed like the full session beat list)."""

    interval_flags: np.ndarray
    noisy_beats: np.ndarray


def _window_bounds(p: int, n_intervals: int) -> tuple[int, int, int, int]:
    """Index ranges of the preceding/following interval windows of the
    beat at active position ``p``."""
    pre_lo = max(0, p - REGIONAL_WINDOW)
    pre_hi = min(p, n_intervals)
    post_lo = min(p, n_intervals)
    post_hi = min(p + REGIONAL_WINDOW, n_intervals)
    return pre_lo, pre_hi, post_lo, post_hi


def regional_stats(
    rri: RriSeries,
    noise: NoiseProfile | None,
    beat_index: int,
    params: IrregularityParams,
    exclude: np.ndarray | None = None,
) -> RegionalStats:
    """Regional RRI and noise means around the beat at active position
    ``beat_index``.

    ``exclude`` masks intervals (usually current outlier flags) out of
    the mean. Raises :class:`EmptyWindow` when fewer than two usable
    intervals remain.
    """
    n = len(rri)
    if not 0 <= beat_index <= n:
        raise IndexError(f"beat index {beat_index} outside 0..{n}")
    pre_lo, pre_hi, post_lo, post_hi = _window_bounds(beat_index, n)
    idx = np.r_[pre_lo:pre_hi, post_lo:post_hi]
    if exclude is not None:
        idx = idx[~np.asarray(exclude, dtype=bool)[idx]]
    if idx.size < 2:
        raise EmptyWindow(
            f"only {idx.size} usable intervals around beat {beat_index}"
        )
    rri_mean = float(np.mean(rri.durations[idx]))

    noise_mean = 0.0
    if noise is not None and len(noise):
        beat_session_idx = (
            rri.left_index[beat_index]
            if beat_index < n
            else rri.right_index[beat_index - 1]
        )
        n_beats = len(noise)
        lo = max(0, beat_session_idx - REGIONAL_WINDOW)
        hi = min(n_beats, beat_session_idx + REGIONAL_WINDOW + 1)
        neighbour_idx = [i for i in range(lo, hi) if i != beat_session_idx]
        if neighbour_idx:
            noise_mean = float(np.mean(noise.per_beat[neighbour_idx]))

    return RegionalStats(
        rri_mean=rri_mean,
        noise_mean=noise_mean,
        lower_frac=params.rri_lower_frac,
        upper_frac=params.rri_upper_frac,
    )


def _regional_means(durations: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised regional means for the beats terminating each interval.

    Returns ``(means, counts)`` indexed by interval: entry ``i`` is the
    window mean around beat ``i + 1``.
    """
    n = durations.size
    csum = np.concatenate(([0.0], np.cumsum(durations)))
    p = np.arange(1, n + 1)  # terminating beat positions
    pre_lo = np.maximum(0, p - REGIONAL_WINDOW)
    pre_hi = np.minimum(p, n)
    post_lo = np.minimum(p, n)
    post_hi = np.minimum(p + REGIONAL_WINDOW, n)
    totals = (csum[pre_hi] - csum[pre_lo]) + (csum[post_hi] - csum[post_lo])
    counts = (pre_hi - pre_lo) + (post_hi - post_lo)
    means = np.divide(totals, counts, out=np.zeros(n), where=counts > 0)
    return means, counts


def detect_outliers(
    rri: RriSeries,
    noise: NoiseProfile | None,
    params: IrregularityParams,
) -> OutlierFlags:
    """Flag outlier intervals and corroborating noisy beats.

    An interval is flagged when its duration leaves the open band
    ``(lower_frac * mean, upper_frac * mean)`` around the regional mean
    of its terminating beat, or the absolute acceptance window. Noise
    flags are returned alongside but never flag an interval by
    themselves.
    """
    durations = rri.durations
    n = durations.size
    flags = np.zeros(n, dtype=bool)
    if n:
        means, counts = _regional_means(durations)
        relative = (counts >= 2) & (
            (durations < params.rri_lower_frac * means)
            | (durations > params.rri_upper_frac * means)
        )
        absolute = (durations < params.accept_min) | (durations > params.accept_max)
        flags = relative | absolute

    if noise is not None and len(noise):
        noisy = classify_noise(
            noise, regional_noise_means(noise, params.rri_upper_frac)
        )
    else:
        noisy = np.zeros(0, dtype=bool)
    return OutlierFlags(interval_flags=flags, noisy_beats=noisy)


def cumulative_sums(rri: RriSeries, beat_index: int, count: int = 4) -> np.ndarray:
    """Partial sums of up to ``count`` intervals after the beat at
    active position ``beat_index`` (fewer near the end of the record).

    The sum closest to the regional mean tells how many raw intervals
    jointly stand in for one true interval."""
    start = beat_index
    stop = min(start + count, len(rri))
    if start >= stop:
        return np.empty(0)
    return np.cumsum(rri.durations[start:stop])


def pair_sum_check(
    rri: RriSeries, interval_index: int, stats: RegionalStats
) -> bool:
    """True when two adjacent intervals sum to roughly twice the
    regional mean (within the regional band), the signature of a single
    mistimed beat between them."""
    if interval_index + 1 >= len(rri):
        return False
    pair = rri.durations[interval_index] + rri.durations[interval_index + 1]
    target = 2.0 * stats.rri_mean
    return stats.lower_frac * target <= pair <= stats.upper_frac * target


def split_eligibility(duration: float, stats: RegionalStats) -> int | None:
    """Number of even sub-intervals a long outlier divides into, if the
    pieces land inside the regional band; ``None`` when ineligible."""
    if stats.rri_mean <= 0:
        return None
    n = int(np.floor(duration / stats.rri_mean + 0.5))
    if n < 2:
        return None
    piece = duration / n
    if stats.lower_frac * stats.rri_mean <= piece <= stats.upper_frac * stats.rri_mean:
        return n
    return None


def detect_pwave(
    record: EcgRecord, beat: BeatMark, sensitivity: float = 1.0
) -> bool:
    """Look for a P-wave in the window before the QRS.

    The window is linearly detrended and lightly smoothed, then local
    extrema of either polarity are examined. One counts as a P-wave
    when its width is P-like (broad humps are detrending residue of a
    neighbouring T-wave) and its prominence strictly exceeds twice the
    deviation of the baseline residual, measured away from the
    candidate itself and divided by ``sensitivity``.
    """
    if not record.has_waveform:
        raise WindowOutOfRange("record has no waveform")
    t0 = beat.time + PWAVE_WINDOW[0]
    t1 = beat.time + PWAVE_WINDOW[1]
    if t0 < 0:
        raise WindowOutOfRange(f"beat at {beat.time:.3f} s too close to record start")
    fs = record.sample_rate
    lo = int(round(t0 * fs))
    hi = min(record.samples.size, int(round(t1 * fs)) + 1)
    window = record.samples[lo:hi]
    if window.size < 5:
        return False
    residual = sps.detrend(window, type="linear")
    if float(np.std(residual)) <= 0:
        return False
    span = max(1, int(round(PWAVE_SMOOTH_S * fs)))
    smoothed = np.convolve(residual, np.ones(span) / span, mode="same")
    max_width = PWAVE_MAX_WIDTH_S * fs
    gap = max(2, int(round(PWAVE_BASELINE_GAP_S * fs)))
    for candidate in (smoothed, -smoothed):
        peaks, props = sps.find_peaks(candidate, prominence=0.0, width=0.0)
        for peak, prom, width in zip(
            peaks, props["prominences"], props["widths"]
        ):
            if width > max_width:
                continue
            keep = np.ones(residual.size, dtype=bool)
            keep[max(0, peak - gap) : peak + gap + 1] = False
            baseline = residual[keep]
            if baseline.size >= 8:
                deviation = float(np.std(baseline))
            else:
                deviation = float(np.std(residual))
            if deviation <= 0:
                continue
            if prom > PWAVE_PROMINENCE_FACTOR * deviation / sensitivity:
                return True
    return False


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------


def mark_outlier_beats(session: Session, flags: OutlierFlags) -> Session:
    """Exclude unprotected beats whose ending interval is flagged.

    This is the identification step; protected, training and already
    excluded beats are left alone.
    """
    out = replace(session, beats=[replace(b) for b in session.beats])
    rri = build_rri(out)
    for i in range(len(rri)):
        if not flags.interval_flags[i]:
            continue
        beat = out.beats[rri.right_index[i]]
        if beat.klass is BeatClass.INCLUDED and not beat.is_protected:
            beat.klass = BeatClass.EXCLUDED
            beat.reason = MarkReason.RRI_OUTLIER
    return out


def _pwave_enabled(session: Session, record: EcgRecord | None) -> bool:
    return (
        session.params.correction.analyze_pwaves
        and record is not None
        and record.has_waveform
    )


def _evaluate_pwave(
    beat: BeatMark, record: EcgRecord | None, sensitivity: float
) -> PwaveState:
    if record is None or not record.has_waveform:
        return PwaveState.UNEVALUATED
    try:
        found = detect_pwave(record, beat, sensitivity)
    except WindowOutOfRange:
        found = False
    return PwaveState.YES if found else PwaveState.NO


def classify_beats(
    session: Session,
    record: EcgRecord | None = None,
    noisy_beats: np.ndarray | None = None,
) -> Session:
    """Apply the ordered decision rules to currently excluded beats.

    Rules, in order, for each open outlier beat (ascending time):

    1. no P-wave, isolated, ending interval shorter than its
       predecessor: the beat is re-timed so its two incident intervals
       match (the short-long pair signature of a premature beat);
    2. P-wave and the next beat also irregular: exclude both for good;
    3. P-wave, isolated, gradual increase within the one-beat threshold:
       re-include;
    4. P-wave and interval above the physiological upper bound: exclude;
    5. P-wave, isolated, gradual decrease within the one-beat threshold:
       re-include.

    Multi-beat excluded runs whose successive changes all stay inside
    the gradual thresholds are re-included as a whole. Without P-wave
    analysis (or without a waveform) rule 1 drops its P-wave
    precondition and rules 2-5 are skipped. Noise flags bar the
    re-include rules but never exclude on their own.
    """
    out = replace(session, beats=[replace(b) for b in session.beats])
    beats = out.beats
    params = session.params.irregularity
    use_pwaves = _pwave_enabled(session, record)
    sensitivity = session.params.correction.pwave_sensitivity

    active = [i for i, b in enumerate(beats) if b.klass is not BeatClass.REMOVED]
    times = np.array([beats[i].time for i in active])
    if times.size < 3:
        return out
    u = np.diff(times)  # u[k]: interval ending at active position k + 1

    def is_noisy(session_idx: int) -> bool:
        if noisy_beats is None or session_idx >= len(noisy_beats):
            return False
        return bool(noisy_beats[session_idx])

    def neighbour_ok(pos: int) -> bool:
        return 0 <= pos < len(active) and beats[active[pos]].klass in _NEIGHBOUR_OK

    def candidate(pos: int) -> bool:
        b = beats[active[pos]]
        return b.klass is BeatClass.EXCLUDED and b.reason in OPEN_EXCLUSIONS

    for p in range(1, len(active)):
        if not candidate(p):
            continue
        beat = beats[active[p]]
        ending = u[p - 1]
        prev_ending = u[p - 2] if p >= 2 else None
        isolated = neighbour_ok(p - 1) and neighbour_ok(p + 1)

        if use_pwaves and beat.pwave is PwaveState.UNEVALUATED:
            beat.pwave = _evaluate_pwave(beat, record, sensitivity)
        has_p = use_pwaves and beat.pwave is PwaveState.YES
        no_p = not use_pwaves or beat.pwave is PwaveState.NO

        # rule 1: mistimed beat inside a short-long pair
        if (
            no_p
            and isolated
            and prev_ending is not None
            and ending < prev_ending
            and p + 1 < len(active)
        ):
            left = beats[active[p - 1]].time
            right = beats[active[p + 1]].time
            beat.time = (left + right) / 2.0
            beat.klass = BeatClass.ADJUSTED
            beat.reason = MarkReason.SHORT_LONG_ADJUSTED
            beat.provenance = Provenance.CORRECTION
            u[p - 1] = beat.time - left
            u[p] = right - beat.time
            continue
        if not has_p:
            continue
        # rule 2: adjacent irregular pair with P-waves
        if p + 1 < len(active) and candidate(p + 1):
            beat.reason = MarkReason.PAIRED_ECTOPIC
            nxt = beats[active[p + 1]]
            nxt.reason = MarkReason.PAIRED_ECTOPIC
            continue
        # rule 3: gradual increase
        if (
            isolated
            and prev_ending is not None
            and ending > prev_ending
            and (ending - prev_ending) / prev_ending <= params.grad_inc_frac
            and not is_noisy(active[p])
        ):
            beat.klass = BeatClass.INCLUDED
            beat.reason = MarkReason.GRADUAL_INCREASE
            beat.provenance = Provenance.CORRECTION
            continue
        # rule 4: sudden increase beyond the physiological bound
        if ending > params.hard_upper_bound:
            beat.reason = MarkReason.SUDDEN_INCREASE
            continue
        # rule 5: gradual decrease
        if (
            isolated
            and prev_ending is not None
            and ending < prev_ending
            and (prev_ending - ending) / prev_ending <= params.grad_dec_frac
            and not is_noisy(active[p])
        ):
            beat.klass = BeatClass.INCLUDED
            beat.reason = MarkReason.GRADUAL_DECREASE
            beat.provenance = Provenance.CORRECTION

    _rescue_gradual_runs(beats, active, u, params, is_noisy)
    return out


def _rescue_gradual_runs(beats, active, u, params, is_noisy) -> None:
    """Re-include whole excluded runs that drift gradually."""
    n = len(active)
    p = 1
    while p < n:
        b = beats[active[p]]
        if not (b.klass is BeatClass.EXCLUDED and b.reason in OPEN_EXCLUSIONS):
            p += 1
            continue
        q = p
        while q + 1 < n:
            nb = beats[active[q + 1]]
            if nb.klass is BeatClass.EXCLUDED and nb.reason in OPEN_EXCLUSIONS:
                q += 1
            else:
                break
        if q > p and p >= 2:
            gradual = True
            for k in range(p - 1, q):
                prev, cur = u[k - 1], u[k]
                if prev <= 0:
                    gradual = False
                    break
                change = (cur - prev) / prev
                limit = params.grad_inc_frac if change > 0 else params.grad_dec_frac
                if abs(change) > limit:
                    gradual = False
                    break
            if gradual and not any(is_noisy(active[k]) for k in range(p, q + 1)):
                for k in range(p, q + 1):
                    beat = beats[active[k]]
                    direction = u[k - 1] >= u[k - 2] if k >= 2 else True
                    beat.klass = BeatClass.INCLUDED
                    beat.reason = (
                        MarkReason.GRADUAL_INCREASE
                        if direction
                        else MarkReason.GRADUAL_DECREASE
                    )
                    beat.provenance = Provenance.CORRECTION
        p = q + 1
