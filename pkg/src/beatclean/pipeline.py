"""End-to-end pipeline: ingest, detect, profile, classify, correct,
region-mark, and emit outputs."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import io as bio
from .correction import (
    count_spectral_epochs,
    mark_regions,
    mark_training,
    run_correction_loops,
)
from .detection import detect_qrs, post_filter, preprocess
from .exceptions import (
    DurationTooLong,
    MinimumDurationError,
    NoSavedRegion,
)
from .irregularity import detect_outliers, mark_outlier_beats
from .model import (
    BeatClass,
    BeatMark,
    EcgRecord,
    PipelineParams,
    Session,
    SourceFormat,
    build_rri,
    build_valid_rri,
)
from .noise import compute_noise_profile
from .validation import ValidationReport, compute_metrics, match_beats

#: Minimum record length accepted by the pipeline, seconds.
MIN_DURATION_S = 120.0


@dataclass
class RandomRegion:
    seed: int | None = 0


@dataclass
class ReuseRegion:
    span: tuple[float, float]


@dataclass
class PipelineConfig:
    input_path: str
    format: str = "auto"
    sample_rate_override: float | None = None
    params: PipelineParams = field(default_factory=PipelineParams)
    test_duration: float | None = None
    seed: int | None = 0
    reuse_region: bool = False
    out_dir: str = "."
    report_path: str | None = None
    reference_path: str | None = None


@dataclass
class PipelineResult:
    session: Session
    rtimes_path: str
    bi_path: str
    session_path: str
    report: ValidationReport | None
    epochs_pre: int
    epochs_post: int
    valid_prop_pre: float = 0.0
    valid_prop_post: float = 0.0


def select_test_region(
    record: EcgRecord, duration: float, mode: RandomRegion | ReuseRegion
) -> tuple[float, float]:
    """Choose the analysis span for parameter testing.

    Random mode draws a uniformly placed span from the seeded generator;
    reuse mode replays a previously saved span exactly.
    """
    total = record.duration
    if duration > total:
        raise DurationTooLong(f"test duration {duration} s > record {total} s")
    if isinstance(mode, ReuseRegion):
        start, end = mode.span
        if not 0 <= start < end <= total + 1e-9:
            raise DurationTooLong(f"saved span [{start}, {end}] outside record")
        return (start, end)
    rng = np.random.default_rng(mode.seed)
    slack = total - duration
    start = float(rng.uniform(0.0, slack)) if slack > 0 else 0.0
    return (start, start + duration)


def _slice_record(record: EcgRecord, span: tuple[float, float]) -> EcgRecord:
    start, end = span
    if record.has_waveform:
        fs = record.sample_rate
        lo = max(0, int(round(start * fs)))
        hi = min(record.samples.size, int(round(end * fs)))
        return replace(
            record, samples=record.samples[lo:hi].copy(), start_offset=start
        )
    times = np.concatenate(([0.0], np.cumsum(record.rri)))
    keep = (times >= start) & (times <= end)
    kept = times[keep]
    return replace(record, rri=np.diff(kept), start_offset=start)


def _beats_from_rri(record: EcgRecord) -> list[BeatMark]:
    times = np.concatenate(([0.0], np.cumsum(record.rri)))
    return [BeatMark(time=float(t)) for t in times]


def _default_out_paths(config: PipelineConfig) -> tuple[str, str, str]:
    stem = os.path.splitext(os.path.basename(config.input_path))[0]
    if stem.endswith(".session"):
        stem = stem[: -len(".session")]
    base = os.path.join(config.out_dir, stem)
    return base + ".rtimes", base + ".bi", base + ".session.json"


def _looks_like_session(path: str, fmt: str) -> bool:
    if fmt == "session":
        return True
    if fmt != "auto":
        return False
    if path.endswith(".json"):
        return True
    try:
        with open(path, "rb") as fh:
            return fh.read(1) == b"{"
    except OSError:
        return False


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Run all stages and write ``.rtimes``, ``.bi`` and session files.

    A session file as input skips detection and correction: outputs are
    regenerated from its (possibly manually edited) beats, which is how
    review-step edits flow back into fresh ``.rtimes``/``.bi`` files.
    """
    os.makedirs(config.out_dir, exist_ok=True)
    if _looks_like_session(config.input_path, config.format):
        session = bio.import_session(config.input_path)
        session.regions = mark_regions(session)
        return _emit(config, session, record=None)

    record = bio.read_record(
        config.input_path, config.format, config.sample_rate_override
    )
    if config.params.detector.invert:
        record = replace(record, inverted=True)
    if record.duration < MIN_DURATION_S:
        raise MinimumDurationError(
            f"record is {record.duration:.1f} s; need at least {MIN_DURATION_S:.0f} s"
        )

    test_span: tuple[float, float] | None = None
    if config.test_duration is not None:
        if config.test_duration < MIN_DURATION_S:
            raise MinimumDurationError(
                f"test duration must be at least {MIN_DURATION_S:.0f} s"
            )
        if config.reuse_region:
            _, _, session_path = _default_out_paths(config)
            if not os.path.exists(session_path):
                raise NoSavedRegion(f"no previous session at {session_path}")
            prior = bio.import_session(session_path)
            if prior.test_region is None:
                raise NoSavedRegion("previous session saved no test region")
            mode: RandomRegion | ReuseRegion = ReuseRegion(prior.test_region)
        else:
            mode = RandomRegion(config.seed)
        test_span = select_test_region(record, config.test_duration, mode)
        record = _slice_record(record, test_span)

    session = Session(
        sample_rate=record.sample_rate,
        source_format=record.source_format,
        record_path=record.path,
        record_duration=record.duration,
        start_offset=record.start_offset,
        inverted=record.inverted,
        params=config.params,
        test_region=test_span,
    )

    if record.has_waveform:
        filtered = preprocess(record, config.params.detector)
        beats = detect_qrs(filtered, config.params.detector)
        beats = post_filter(beats, filtered, config.params.detector)
        session.beats = beats
        profile = compute_noise_profile(
            record, beats, config.params.noise_window_ms
        )
        for beat, value in zip(session.beats, profile.per_beat):
            beat.noise_value = float(value)
    else:
        session.beats = _beats_from_rri(record)
        session.rri_input = [float(v) for v in record.rri]

    session = mark_training(session)

    # post-identification snapshot for the before/after epoch comparison
    flags = detect_outliers(
        build_rri(session),
        None,
        config.params.irregularity,
    )
    identified = mark_outlier_beats(session, flags)
    regions_pre = mark_regions(identified)
    epochs_pre = count_spectral_epochs(
        build_valid_rri(identified), regions_pre, identified.record_duration
    )

    corrected = run_correction_loops(
        session,
        config.params.correction,
        record if record.has_waveform else None,
    )
    corrected.regions = mark_regions(corrected)
    result = _emit(config, corrected, record)
    result.epochs_pre = epochs_pre
    result.valid_prop_pre = _valid_prop(identified)
    result.valid_prop_post = _valid_prop(corrected)
    return result


def _valid_prop(session: Session) -> float:
    active = session.active_beats()
    if not active:
        return 0.0
    return sum(1 for b in active if b.is_valid) / len(active)


def _emit(
    config: PipelineConfig, session: Session, record: EcgRecord | None
) -> PipelineResult:
    rtimes_path, bi_path, session_path = _default_out_paths(config)
    epochs_post = count_spectral_epochs(
        build_valid_rri(session), session.regions, session.record_duration
    )

    report: ValidationReport | None = None
    if config.reference_path:
        reference = bio.read_reference_annotations(config.reference_path)
        detected = session.active_beats()
        matching = match_beats(detected, reference)
        report = compute_metrics(matching, detected)
        report.epochs_post = epochs_post
        session.validation = {
            "reference_path": config.reference_path,
            "accuracy": report.accuracy,
            "precision": report.precision,
            "ppv": report.ppv,
        }

    bio.write_rtimes(session.beats, rtimes_path)
    bio.write_bad_intervals(session.regions, bi_path)
    bio.export_session(session, session_path)
    if report is not None and config.report_path:
        with open(config.report_path, "w", encoding="ascii", newline="") as fh:
            fh.write(report.as_text())
    return PipelineResult(
        session=session,
        rtimes_path=rtimes_path,
        bi_path=bi_path,
        session_path=session_path,
        report=report,
        epochs_pre=0,
        epochs_post=epochs_post,
    )
