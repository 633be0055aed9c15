"""Corrections for excluded beats, region marking and epoch counting.

Three corrections exist: deleting surplus detections so the merged
intervals land near the regional mean, splitting long gaps into even
sub-intervals, and re-timing the middle beat of a short-long pair.
They run inside a loop because each correction shifts the regional
statistics the next decision reads.
"""

from __future__ import annotations

from dataclasses import replace
from itertools import combinations

import numpy as np

from .exceptions import (
    EmptyWindow,
    IneligibleInterval,
    InsufficientBeats,
    NotAPair,
)
from .irregularity import (
    OPEN_EXCLUSIONS,
    RegionalStats,
    classify_beats,
    detect_outliers,
    mark_outlier_beats,
    pair_sum_check,
    regional_stats,
    split_eligibility,
)
from .model import (
    BeatClass,
    BeatMark,
    CorrectionParams,
    EcgRecord,
    MarkReason,
    Provenance,
    Region,
    RegionReason,
    RriSeries,
    Session,
    build_rri,
    normalize_regions,
)
from .noise import (
    NoiseProfile,
    classify_noise,
    compute_noise_profile,
    regional_noise_means,
)

#: Beats at each end of the record reserved for seeding the statistics.
TRAINING_BEATS = 20

#: Paired-removal search is exhaustive up to this run length.
EXHAUSTIVE_RUN_LIMIT = 6

#: Spectral epoch length, seconds.
EPOCH_S = 300.0

#: Acceptance window for intervals inside a spectral epoch, seconds.
EPOCH_RRI_BOUNDS = (0.3, 1.8)


def _clone(session: Session) -> Session:
    return replace(session, beats=[replace(b) for b in session.beats])


def _profile_from_beats(session: Session) -> NoiseProfile:
    values = np.array([b.noise_value for b in session.beats], dtype=np.float64)
    return NoiseProfile(per_beat=values, window_ms=session.params.noise_window_ms)


def _open_excluded(beat: BeatMark) -> bool:
    return beat.klass is BeatClass.EXCLUDED and beat.reason in OPEN_EXCLUSIONS


def mark_training(session: Session, count: int = TRAINING_BEATS) -> Session:
    """Reserve the first and last ``count`` beats as training beats."""
    out = _clone(session)
    active = [i for i, b in enumerate(out.beats) if b.klass is not BeatClass.REMOVED]
    if len(active) < 2 * count + 3:
        raise InsufficientBeats(
            f"{len(active)} beats detected; need more than {2 * count + 3}"
        )
    for i in active[:count] + active[-count:]:
        beat = out.beats[i]
        beat.klass = BeatClass.TRAINING
        beat.reason = MarkReason.TRAINING
    return out


def _anchored_mean(session, rri, flags, position, own=()):
    """Regional mean at an active position, leaving out the position's
    own flagged intervals (``own`` holds their indices). Falls back to
    the unflagged, then the full, series when the window is degenerate."""
    mask = np.zeros(len(rri), dtype=bool)
    for k in own:
        if 0 <= k < len(rri) and flags[k]:
            mask[k] = True
    try:
        return regional_stats(
            rri,
            _profile_from_beats(session),
            position,
            session.params.irregularity,
            exclude=mask,
        )
    except EmptyWindow:
        pass
    durations = rri.durations[~flags] if flags is not None else rri.durations
    if durations.size == 0:
        durations = rri.durations
    mean = float(np.mean(durations)) if durations.size else 0.0
    p = session.params.irregularity
    return RegionalStats(
        rri_mean=mean,
        noise_mean=0.0,
        lower_frac=p.rri_lower_frac,
        upper_frac=p.rri_upper_frac,
    )


def _merged_costs(spans: np.ndarray, removed: tuple[int, ...], mean: float) -> float:
    """Cost of a removal subset: squared deviation from the regional
    mean of the intervals that remain after merging."""
    total = 0.0
    acc = 0.0
    for k, d in enumerate(spans):
        acc += d
        # interval k ends at inner beat k except for the last interval
        if k < spans.size - 1 and (k in removed):
            continue
        total += (acc - mean) ** 2
        acc = 0.0
    return total


def _best_removal_subset(
    spans: np.ndarray, mean: float
) -> tuple[int, ...]:
    """Exhaustive search over removable inner beats of a short run.

    ``spans`` are the ``k + 1`` intervals between the run's anchors;
    inner beat ``j`` separates span ``j`` from span ``j + 1``. Ties
    favour fewer removals, then the lexicographically first subset.
    """
    inner = spans.size - 1
    best: tuple[float, int, tuple[int, ...]] | None = None
    for size in range(inner + 1):
        for subset in combinations(range(inner), size):
            cost = _merged_costs(spans, subset, mean)
            key = (cost, size, subset)
            if best is None or key < best:
                best = key
    return best[2] if best else ()


def _greedy_removal_subset(spans: np.ndarray, mean: float) -> tuple[int, ...]:
    """Greedy fallback for long runs: keep deleting the single beat
    whose removal lowers the cost most, until no removal helps."""
    removed: set[int] = set()
    inner = spans.size - 1
    current = _merged_costs(spans, tuple(removed), mean)
    while True:
        best_gain = 0.0
        best_j: int | None = None
        for j in range(inner):
            if j in removed:
                continue
            cost = _merged_costs(spans, tuple(sorted(removed | {j})), mean)
            gain = current - cost
            if gain > best_gain:
                best_gain, best_j = gain, j
        if best_j is None:
            break
        removed.add(best_j)
        current -= best_gain
    return tuple(sorted(removed))


def remove_extra_beats(session: Session) -> Session:
    """Delete surplus beats inside flagged runs (extra detections,
    typically noise-induced) so the merged intervals sit closest to the
    regional mean. May remove several adjacent beats; the run's enclosing
    valid beats never move.
    """
    out = _clone(session)
    rri = build_rri(out)
    if len(rri) == 0:
        return out
    flags = detect_outliers(
        rri, _profile_from_beats(out), out.params.irregularity
    ).interval_flags

    active = [i for i, b in enumerate(out.beats) if b.klass is not BeatClass.REMOVED]
    runs: list[tuple[int, int]] = []
    p = 0
    while p < len(active):
        if _open_excluded(out.beats[active[p]]):
            q = p
            while q + 1 < len(active) and _open_excluded(out.beats[active[q + 1]]):
                q += 1
            runs.append((p, q))
            p = q + 1
        else:
            p += 1

    for p0, p1 in runs:
        if p0 == 0 or p1 + 1 >= len(active):
            continue  # no anchor on one side; leave for region marking
        stats = _anchored_mean(out, rri, flags, p0 - 1, own=(p0 - 2, p0 - 1))
        if stats.rri_mean <= 0:
            continue
        spans = rri.durations[p0 - 1 : p1 + 1].copy()
        if spans.size - 1 <= EXHAUSTIVE_RUN_LIMIT:
            subset = _best_removal_subset(spans, stats.rri_mean)
        else:
            subset = _greedy_removal_subset(spans, stats.rri_mean)
        for j in subset:
            beat = out.beats[active[p0 + j]]
            beat.klass = BeatClass.REMOVED
            beat.reason = MarkReason.EXTRA_REMOVED
            beat.provenance = Provenance.CORRECTION
    return out


def interpolate_long(
    session: Session,
    interval_index: int,
    n: int,
    record: EcgRecord | None = None,
) -> Session:
    """Split one long interval into ``n`` equal sub-intervals by
    inserting ``n - 1`` beats; the endpoints never move."""
    if n < 2:
        raise IneligibleInterval(f"cannot split into {n} sub-intervals")
    out = _clone(session)
    rri = build_rri(out)
    if not 0 <= interval_index < len(rri):
        raise IneligibleInterval(f"no interval {interval_index}")
    start = rri.left_time[interval_index]
    duration = rri.durations[interval_index]
    piece = duration / n
    inserted = []
    for k in range(1, n):
        t = start + k * piece
        beat = BeatMark(
            time=t,
            klass=BeatClass.INTERPOLATED,
            reason=MarkReason.GAP_INTERPOLATED,
            provenance=Provenance.CORRECTION,
        )
        if record is not None and record.has_waveform:
            prof = compute_noise_profile(
                record, [beat], out.params.noise_window_ms
            )
            beat.noise_value = float(prof.per_beat[0])
        inserted.append(beat)
    insert_at = int(rri.right_index[interval_index])
    out.beats[insert_at:insert_at] = inserted
    return out


def adjust_short_long(
    session: Session,
    interval_index: int,
    reason: MarkReason = MarkReason.PAIR_ADJUSTED,
) -> Session:
    """Smooth a short-long (or long-short) interval pair by moving the
    shared middle beat so both intervals equal the pair mean; the outer
    beats stay put so the pair's total span is conserved exactly."""
    out = _clone(session)
    rri = build_rri(out)
    if not 0 <= interval_index < len(rri) - 1:
        raise NotAPair(f"intervals {interval_index},{interval_index + 1} missing")
    left = rri.left_time[interval_index]
    right = rri.right_time[interval_index + 1]
    beat = out.beats[rri.right_index[interval_index]]
    beat.time = (left + right) / 2.0
    beat.klass = BeatClass.ADJUSTED
    beat.reason = reason
    beat.provenance = Provenance.CORRECTION
    return out


def _interpolate_pass(session: Session, record: EcgRecord | None) -> Session:
    """Split every eligible flagged long interval, re-deriving the
    statistics after each insertion."""
    params = session.params.irregularity
    while True:
        rri = build_rri(session)
        if len(rri) == 0:
            return session
        flags = detect_outliers(
            rri, _profile_from_beats(session), params
        ).interval_flags
        done = True
        for i in range(len(rri)):
            if not flags[i]:
                continue
            beat = session.beats[rri.right_index[i]]
            if not _open_excluded(beat):
                continue
            stats = _anchored_mean(session, rri, flags, i + 1, own=(i, i + 1))
            if rri.durations[i] <= stats.upper_frac * stats.rri_mean:
                continue  # flagged short or by the absolute lower bound
            n = split_eligibility(float(rri.durations[i]), stats)
            if n is None:
                continue
            session = interpolate_long(session, i, n, record=record)
            done = False
            break
        if done:
            return session


def _adjust_pairs_pass(session: Session) -> Session:
    """Smooth remaining short-long interval pairs: both intervals still
    flagged, one on each side of the regional mean, and their summed
    span about twice that mean."""
    params = session.params.irregularity
    while True:
        rri = build_rri(session)
        if len(rri) == 0:
            return session
        flags = detect_outliers(
            rri, _profile_from_beats(session), params
        ).interval_flags
        adjusted = False
        active_right = rri.right_index
        for i in range(len(rri) - 1):
            mid = session.beats[active_right[i]]
            nxt = session.beats[active_right[i + 1]]
            if not (_open_excluded(mid) and _open_excluded(nxt)):
                continue
            if not (flags[i] and flags[i + 1]):
                continue
            stats = _anchored_mean(session, rri, flags, i + 1, own=(i, i + 1))
            d1, d2 = float(rri.durations[i]), float(rri.durations[i + 1])
            if not min(d1, d2) < stats.rri_mean < max(d1, d2):
                continue
            if not pair_sum_check(rri, i, stats):
                continue
            session = adjust_short_long(session, i)
            adjusted = True
            break
        if not adjusted:
            return session


def _refresh_exclusions(session: Session) -> Session:
    """Re-run outlier detection and lift exclusions whose evidence is
    gone; confirmed (P-wave settled) exclusions stay."""
    out = _clone(session)
    rri = build_rri(out)
    if len(rri) == 0:
        return out
    flags = detect_outliers(
        rri, _profile_from_beats(out), out.params.irregularity
    ).interval_flags
    for i in range(len(rri)):
        beat = out.beats[rri.right_index[i]]
        if _open_excluded(beat) and not flags[i]:
            beat.klass = BeatClass.INCLUDED
            beat.reason = MarkReason.RESCUED
            beat.provenance = Provenance.CORRECTION
    return out


def run_correction_loops(
    session: Session,
    params: CorrectionParams,
    record: EcgRecord | None = None,
) -> Session:
    """Iterate identification, classification and correction.

    Each loop re-derives the regional statistics, applies the P-wave
    rules, then removal / interpolation / pair smoothing, and finally
    lifts exclusions whose evidence disappeared. Outliers are marked
    once, in the first loop; later loops only settle or rescue beats,
    so the excluded count can only fall and reruns cannot oscillate
    into overcorrection.
    """
    current = session
    for loop in range(params.loops):
        profile = _profile_from_beats(current)
        flags = detect_outliers(
            build_rri(current), profile, current.params.irregularity
        )
        if loop == 0:
            current = mark_outlier_beats(current, flags)
        current = classify_beats(current, record, flags.noisy_beats)
        current = remove_extra_beats(current)
        current = _interpolate_pass(current, record)
        current = _adjust_pairs_pass(current)
        current = _refresh_exclusions(current)
    return current


# --------------------------------------------------------------------------
# regions and epochs
# --------------------------------------------------------------------------


def _noisy_lookup(session: Session) -> np.ndarray:
    profile = _profile_from_beats(session)
    if len(profile) == 0:
        return np.zeros(0, dtype=bool)
    return classify_noise(
        profile,
        regional_noise_means(profile, session.params.irregularity.rri_upper_frac),
    )


def mark_regions(session: Session) -> list[Region]:
    """Derive the excluded spans of the record.

    Training regions cover the record up to the midpoint between the
    last training beat and its neighbour (and symmetrically at the
    tail). Every maximal run of excluded beats becomes a region from the
    midpoint with the last valid beat before it to the midpoint with the
    first valid beat after it, extended to the record edge when no such
    neighbour exists. Runs dominated by noisy beats are tagged NOISE.
    Touching regions merge; manually drawn regions are preserved.
    """
    duration = session.record_duration
    active = [
        i for i, b in enumerate(session.beats) if b.klass is not BeatClass.REMOVED
    ]
    beats = session.beats
    regions: list[Region] = [
        r for r in session.regions if r.reason is RegionReason.MANUAL
    ]

    training = [p for p in range(len(active)) if beats[active[p]].klass is BeatClass.TRAINING]
    if training:
        head_last = -1
        for p in range(len(active)):
            if beats[active[p]].klass is BeatClass.TRAINING:
                head_last = p
            else:
                break
        if head_last >= 0:
            if head_last + 1 < len(active):
                end = _mid(beats[active[head_last]].time, beats[active[head_last + 1]].time)
            else:
                end = duration
            if end > 0:
                regions.append(Region(0.0, end, RegionReason.TRAINING))
        tail_first = len(active)
        for p in range(len(active) - 1, -1, -1):
            if beats[active[p]].klass is BeatClass.TRAINING:
                tail_first = p
            else:
                break
        if tail_first < len(active) and tail_first > head_last:
            if tail_first > 0:
                start = _mid(beats[active[tail_first - 1]].time, beats[active[tail_first]].time)
            else:
                start = 0.0
            if start < duration:
                regions.append(Region(start, duration, RegionReason.TRAINING))

    noisy = _noisy_lookup(session)
    p = 0
    while p < len(active):
        if beats[active[p]].klass is not BeatClass.EXCLUDED:
            p += 1
            continue
        q = p
        while q + 1 < len(active) and beats[active[q + 1]].klass is BeatClass.EXCLUDED:
            q += 1
        start = (
            _mid(beats[active[p - 1]].time, beats[active[p]].time) if p > 0 else 0.0
        )
        end = (
            _mid(beats[active[q]].time, beats[active[q + 1]].time)
            if q + 1 < len(active)
            else duration
        )
        flagged_noisy = sum(
            1
            for k in range(p, q + 1)
            if active[k] < noisy.size and noisy[active[k]]
        )
        reason = (
            RegionReason.NOISE
            if 2 * flagged_noisy > (q - p + 1)
            else RegionReason.IRREGULAR
        )
        if start < end:
            regions.append(Region(start, end, reason))
        p = q + 1

    return normalize_regions(regions)


def _mid(a: float, b: float) -> float:
    return (a + b) / 2.0


def count_spectral_epochs(
    rri: RriSeries,
    regions: list[Region],
    duration: float | None = None,
) -> int:
    """Count clean five-minute epochs.

    Consecutive non-overlapping windows are tiled from the end of the
    leading training region; a window qualifies when no irregular or
    noisy region overlaps it and every interval touching it stays inside
    the acceptance bounds.
    """
    anchor = 0.0
    for region in sorted(regions, key=lambda r: r.start):
        if region.reason is RegionReason.TRAINING and region.start == 0.0:
            anchor = region.end
        break
    if duration is None:
        candidates = [r.end for r in regions]
        if len(rri):
            candidates.append(float(rri.right_time[-1]))
        duration = max(candidates, default=0.0)

    bad = [
        r
        for r in regions
        if r.reason in (RegionReason.IRREGULAR, RegionReason.NOISE)
    ]
    lo, hi = EPOCH_RRI_BOUNDS
    count = 0
    start = anchor
    while start + EPOCH_S <= duration + 1e-9:
        end = start + EPOCH_S
        ok = all(not (r.start < end and r.end > start) for r in bad)
        if ok and len(rri):
            touching = (rri.right_time > start) & (rri.left_time < end)
            d = rri.durations[touching]
            ok = bool(np.all((d >= lo) & (d <= hi))) if d.size else True
        if ok:
            count += 1
        start = end
    return count
