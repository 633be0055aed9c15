"""Scoring of pipeline output against reference annotations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import AnnotationLabel, BeatMark, ReferenceAnnotations

#: Default matching tolerance between detections and reference beats.
MATCH_TOLERANCE_MS = 150.0

#: Noise-stress protocol: the first noisy stretch starts after five
#: clean minutes, then two-minute noisy/clean segments alternate.
NST_FIRST_NOISE_S = 300.0
NST_SEGMENT_S = 120.0


@dataclass
class BeatMatching:
    """One-to-one assignment between detections and reference beats."""

    detected_times: np.ndarray
    reference_times: np.ndarray
    reference_labels: list[AnnotationLabel]
    pairs: list[tuple[int, int]]      # (detected idx, reference idx)
    tolerance_ms: float

    @property
    def matched_reference(self) -> set[int]:
        return {r for _, r in self.pairs}

    @property
    def matched_detected(self) -> set[int]:
        return {d for d, _ in self.pairs}


def match_beats(
    detected: list[BeatMark],
    reference: ReferenceAnnotations,
    tolerance_ms: float = MATCH_TOLERANCE_MS,
) -> BeatMatching:
    """Greedy nearest-neighbour one-to-one matching within tolerance.

    Candidate pairs are taken in order of ascending time difference;
    each detection and each reference beat is used at most once.
    Unmatched reference beats are "not present" in the output; unmatched
    detections have no counterpart in the reference.
    """
    det_times = np.array([b.time for b in detected], dtype=np.float64)
    ref = reference.beat_entries()
    ref_times = np.array([t for t, _ in ref], dtype=np.float64)
    ref_labels = [lab for _, lab in ref]
    tol = tolerance_ms / 1000.0

    candidates: list[tuple[float, int, int]] = []
    j0 = 0
    for r, rt in enumerate(ref_times):
        j0 = int(np.searchsorted(det_times, rt - tol, side="left"))
        j = j0
        while j < det_times.size and det_times[j] <= rt + tol:
            candidates.append((abs(det_times[j] - rt), j, r))
            j += 1
    candidates.sort()

    used_det = np.zeros(det_times.size, dtype=bool)
    used_ref = np.zeros(ref_times.size, dtype=bool)
    pairs: list[tuple[int, int]] = []
    for _, d, r in candidates:
        if used_det[d] or used_ref[r]:
            continue
        used_det[d] = True
        used_ref[r] = True
        pairs.append((d, r))
    pairs.sort()
    return BeatMatching(
        detected_times=det_times,
        reference_times=ref_times,
        reference_labels=ref_labels,
        pairs=pairs,
        tolerance_ms=tolerance_ms,
    )


@dataclass
class ValidationReport:
    """Metrics mirroring the reference-comparison tables.

    ``precision`` is the plain count ratio (total detected over total
    reference); the classical positive predictive value is reported
    separately as ``ppv`` to avoid confusion.
    """

    accuracy: float
    precision: float
    ppv: float
    proportion_normal: float
    pvc_found_prop: float
    pac_found_prop: float
    pvc_included_prop: float
    pac_excluded_prop: float
    valid_prop: float
    irregular_prop: float
    not_present_prop: float
    epochs_pre: int = 0
    epochs_post: int = 0
    noise_accuracy_by_record: dict[str, float] = field(default_factory=dict)

    def as_text(self) -> str:
        lines = [
            f"accuracy: {self.accuracy:.6f}",
            f"precision: {self.precision:.6f}",
            f"ppv: {self.ppv:.6f}",
            f"proportion_normal: {self.proportion_normal:.6f}",
            f"pvc_found_prop: {self.pvc_found_prop:.6f}",
            f"pac_found_prop: {self.pac_found_prop:.6f}",
            f"pvc_included_prop: {self.pvc_included_prop:.6f}",
            f"pac_excluded_prop: {self.pac_excluded_prop:.6f}",
            f"valid_prop: {self.valid_prop:.6f}",
            f"irregular_prop: {self.irregular_prop:.6f}",
            f"not_present_prop: {self.not_present_prop:.6f}",
            f"epochs_pre: {self.epochs_pre}",
            f"epochs_post: {self.epochs_post}",
        ]
        for name, value in sorted(self.noise_accuracy_by_record.items()):
            lines.append(f"noise_accuracy[{name}]: {value:.6f}")
        return "\n".join(lines) + "\n"


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def compute_metrics(
    matching: BeatMatching, detected: list[BeatMark]
) -> ValidationReport:
    """Metrics over a matching, with post-correction classes attached.

    accuracy = matched / total reference; precision = total detected /
    total reference (count ratio, see :class:`ValidationReport`);
    class-conditional proportions follow the reference labels.
    """
    n_ref = matching.reference_times.size
    n_det = matching.detected_times.size
    n_matched = len(matching.pairs)

    by_ref: dict[int, int] = {r: d for d, r in matching.pairs}
    valid = 0
    irregular = 0
    normal_included = 0
    totals = {AnnotationLabel.PVC: 0, AnnotationLabel.ATRIAL_PREMATURE: 0}
    found = {AnnotationLabel.PVC: 0, AnnotationLabel.ATRIAL_PREMATURE: 0}
    pvc_included = 0
    pac_excluded = 0
    n_normal = 0

    for r, label in enumerate(matching.reference_labels):
        if label is AnnotationLabel.NORMAL:
            n_normal += 1
        if label in totals:
            totals[label] += 1
        d = by_ref.get(r)
        if d is None:
            continue
        beat_valid = detected[d].is_valid
        if beat_valid:
            valid += 1
        else:
            irregular += 1
        if label is AnnotationLabel.NORMAL and beat_valid:
            normal_included += 1
        if label in found:
            found[label] += 1
        if label is AnnotationLabel.PVC and beat_valid:
            pvc_included += 1
        if label is AnnotationLabel.ATRIAL_PREMATURE and not beat_valid:
            pac_excluded += 1

    return ValidationReport(
        accuracy=_safe_div(n_matched, n_ref),
        precision=_safe_div(n_det, n_ref),
        ppv=_safe_div(n_matched, n_det),
        proportion_normal=_safe_div(normal_included, n_normal),
        pvc_found_prop=_safe_div(found[AnnotationLabel.PVC], totals[AnnotationLabel.PVC]),
        pac_found_prop=_safe_div(
            found[AnnotationLabel.ATRIAL_PREMATURE],
            totals[AnnotationLabel.ATRIAL_PREMATURE],
        ),
        pvc_included_prop=_safe_div(pvc_included, totals[AnnotationLabel.PVC]),
        pac_excluded_prop=_safe_div(
            pac_excluded, totals[AnnotationLabel.ATRIAL_PREMATURE]
        ),
        valid_prop=_safe_div(valid, n_ref),
        irregular_prop=_safe_div(irregular, n_ref),
        not_present_prop=_safe_div(n_ref - n_matched, n_ref),
    )


def nst_noise_schedule(duration_s: float) -> list[tuple[float, float]]:
    """Noisy spans of a noise-stress record of the given length."""
    spans: list[tuple[float, float]] = []
    start = NST_FIRST_NOISE_S
    while start < duration_s:
        spans.append((start, min(start + NST_SEGMENT_S, duration_s)))
        start += 2 * NST_SEGMENT_S
    return spans


def noise_accuracy(
    beats: list[BeatMark],
    noisy_flags: np.ndarray,
    noise_segments: list[tuple[float, float]],
) -> float:
    """Per-beat agreement between the noisy flag and whether the beat
    falls inside a noise-injected segment."""
    if len(beats) != len(noisy_flags):
        raise ValueError("flags must align with beats")
    if not beats:
        return 0.0
    agree = 0
    for beat, flagged in zip(beats, noisy_flags):
        in_noise = any(a <= beat.time < b for a, b in noise_segments)
        agree += int(bool(flagged) == in_noise)
    return agree / len(beats)
