"""validation tests: matching, metrics, noise-classification scoring."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beatclean.model import (
    AnnotationLabel,
    BeatClass,
    BeatMark,
    ReferenceAnnotations,
)
from beatclean.validation import (
    compute_metrics,
    match_beats,
    noise_accuracy,
    nst_noise_schedule,
)


def _beats(times, klass=BeatClass.INCLUDED):
    return [BeatMark(float(t), klass) for t in times]


def _reference(times, label=AnnotationLabel.NORMAL):
    if isinstance(label, list):
        return ReferenceAnnotations(list(zip(map(float, times), label)))
    return ReferenceAnnotations([(float(t), label) for t in times])


# ------------------------------------------------------------------ matching


def test_match_identical_lists():
    times = np.arange(0.5, 60.0, 0.8)
    matching = match_beats(_beats(times), _reference(times))
    assert len(matching.pairs) == times.size


def test_match_shifted_beyond_tolerance():
    times = np.arange(0.5, 60.0, 0.8)
    matching = match_beats(_beats(times + 0.2), _reference(times), tolerance_ms=150.0)
    assert matching.pairs == []


def test_match_one_to_one():
    matching = match_beats(_beats([0.94, 1.06]), _reference([1.0]))
    assert len(matching.pairs) == 1


def test_match_prefers_nearest():
    matching = match_beats(_beats([0.95, 1.01]), _reference([1.0]))
    assert matching.pairs == [(1, 0)]


def test_match_count_bounded():
    det = _beats(np.arange(0.0, 10.0, 0.5))
    ref = _reference(np.arange(0.0, 10.0, 1.0))
    matching = match_beats(det, ref)
    assert len(matching.pairs) <= min(len(det), ref and len(ref.entries))


@settings(max_examples=100, deadline=None)
@given(
    seed=st.integers(0, 100_000),
    jitter_ms=st.floats(min_value=0.0, max_value=60.0),
)
def test_match_recovers_jittered_truth(seed, jitter_ms):
    rng = np.random.default_rng(seed)
    truth = np.cumsum(0.7 + 0.3 * rng.random(50)) + 1.0
    jitter = rng.uniform(-jitter_ms / 1000, jitter_ms / 1000, truth.size)
    matching = match_beats(_beats(truth + jitter), _reference(truth))
    assert len(matching.pairs) == truth.size


# ------------------------------------------------------------------- metrics


def test_metrics_perfect_run():
    times = np.arange(0.5, 60.0, 0.8)
    detected = _beats(times)
    report = compute_metrics(match_beats(detected, _reference(times)), detected)
    assert report.accuracy == 1.0
    assert report.precision == 1.0
    assert report.ppv == 1.0
    assert report.valid_prop == 1.0
    assert report.not_present_prop == 0.0


def test_metrics_count_ratios():
    # 90 of 100 reference matched; 95 detections in total
    ref_times = np.arange(0.0, 100.0, 1.0)
    det_times = np.concatenate(
        [ref_times[:90], np.arange(200.0, 205.0, 1.0)]
    )  # 5 extra detections far away
    detected = _beats(det_times)
    report = compute_metrics(
        match_beats(detected, _reference(ref_times)), detected
    )
    assert report.accuracy == pytest.approx(0.90)
    assert report.precision == pytest.approx(0.95)
    assert report.ppv == pytest.approx(90 / 95)


def test_metrics_proportions_sum_to_one():
    rng = np.random.default_rng(3)
    ref_times = np.cumsum(0.7 + 0.3 * rng.random(200))
    classes = [
        BeatClass.INCLUDED if k % 3 else BeatClass.EXCLUDED for k in range(180)
    ]
    detected = [
        BeatMark(float(t), c) for t, c in zip(ref_times[:180], classes)
    ]
    report = compute_metrics(
        match_beats(detected, _reference(ref_times)), detected
    )
    total = report.valid_prop + report.irregular_prop + report.not_present_prop
    assert total == pytest.approx(1.0, abs=1e-9)


def test_metrics_class_conditional():
    labels = [AnnotationLabel.NORMAL, AnnotationLabel.PVC,
              AnnotationLabel.PVC, AnnotationLabel.ATRIAL_PREMATURE]
    ref = _reference([1.0, 2.0, 3.0, 4.0], labels)
    detected = [
        BeatMark(1.0, BeatClass.INCLUDED),
        BeatMark(2.0, BeatClass.EXCLUDED),   # PVC excluded
        BeatMark(3.0, BeatClass.INCLUDED),   # PVC included
        BeatMark(4.0, BeatClass.EXCLUDED),   # PAC excluded
    ]
    report = compute_metrics(match_beats(detected, ref), detected)
    assert report.proportion_normal == 1.0
    assert report.pvc_found_prop == 1.0
    assert report.pvc_included_prop == 0.5
    assert report.pac_found_prop == 1.0
    assert report.pac_excluded_prop == 1.0


def test_metrics_independent_tally():
    # recompute the headline numbers from the raw matching by hand
    rng = np.random.default_rng(9)
    ref_times = np.cumsum(0.6 + 0.5 * rng.random(120))
    keep = rng.random(120) > 0.15
    det_times = ref_times[keep] + rng.uniform(-0.05, 0.05, keep.sum())
    detected = _beats(np.sort(det_times))
    matching = match_beats(detected, _reference(ref_times))
    report = compute_metrics(matching, detected)
    matched_ref = {r for _, r in matching.pairs}
    assert report.accuracy == len(matched_ref) / 120
    assert report.precision == len(detected) / 120
    assert report.not_present_prop == (120 - len(matched_ref)) / 120


# ------------------------------------------------------------ noise accuracy


def test_noise_accuracy_all_correct():
    beats = _beats([100.0, 350.0, 550.0])
    flags = np.array([False, True, False])
    assert noise_accuracy(beats, flags, [(300.0, 420.0)]) == 1.0


def test_noise_accuracy_random_flags_near_half():
    rng = np.random.default_rng(17)
    duration = 1800.0
    times = np.arange(0.5, duration, 0.8)
    beats = _beats(times)
    segments = [(a, b) for a, b in nst_noise_schedule(duration)]
    accuracies = []
    for _ in range(30):
        flags = rng.random(times.size) < 0.5
        accuracies.append(noise_accuracy(beats, flags, segments))
    assert np.mean(accuracies) == pytest.approx(0.5, abs=0.03)


def test_nst_schedule_shape():
    spans = nst_noise_schedule(1800.0)
    assert spans[0] == (300.0, 420.0)
    assert spans[1] == (540.0, 660.0)
    assert all(b - a == pytest.approx(120.0) for a, b in spans[:-1])


def test_noise_accuracy_alignment():
    with pytest.raises(ValueError):
        noise_accuracy(_beats([1.0]), np.array([True, False]), [])
