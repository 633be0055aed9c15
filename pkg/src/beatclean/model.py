"""Domain model: records, beat marks, regions, parameters and sessions.

All times are seconds from the start of the record as 64-bit floats;
sample indices are derived where needed and never stored.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np


class SourceFormat(enum.Enum):
    TXT = "TXT"
    EDF = "EDF"
    BDF = "BDF"
    WFDB = "WFDB"
    RRI_ONLY = "RRI_ONLY"


class BeatClass(enum.Enum):
    """Lifecycle state of a detected beat."""

    INCLUDED = "INCLUDED"
    EXCLUDED = "EXCLUDED"
    ADJUSTED = "ADJUSTED"
    INTERPOLATED = "INTERPOLATED"
    REMOVED = "REMOVED"
    TRAINING = "TRAINING"


#: Classes whose beats contribute to the output RRI series.
VALID_CLASSES = frozenset(
    {BeatClass.INCLUDED, BeatClass.ADJUSTED, BeatClass.INTERPOLATED}
)


class MarkReason(enum.Enum):
    """Why a beat carries its current class (viewer colour key)."""

    SHORT_LONG_ADJUSTED = "BT1"       # pink: early beat re-timed to smooth an SL pair
    PAIRED_ECTOPIC = "BT2"            # red: adjacent irregular pair, P-waves present
    GRADUAL_INCREASE = "BT3"          # blue: drift within the one-beat threshold
    SUDDEN_INCREASE = "BT4"           # red: above the physiological upper bound
    GRADUAL_DECREASE = "BT5"          # blue: drift within the one-beat threshold
    EXTRA_REMOVED = "BT6"             # green: surplus detection deleted
    GAP_INTERPOLATED = "BT7"          # cyan: long interval split evenly
    PAIR_ADJUSTED = "BT8"             # pink: residual SL pair smoothed
    LOW_SCORE = "LOW_SCORE"           # demoted by the detector's post filter
    RRI_OUTLIER = "RRI_OUTLIER"       # outside the regional or absolute bounds
    RESCUED = "RESCUED"               # re-included after statistics settled
    TRAINING = "TRAINING"
    MANUAL = "MANUAL"


class Provenance(enum.Enum):
    DETECTOR = "DETECTOR"
    CORRECTION = "CORRECTION"
    MANUAL = "MANUAL"


class PwaveState(enum.Enum):
    YES = "YES"
    NO = "NO"
    UNEVALUATED = "UNEVALUATED"


@dataclass
class BeatMark:
    """One detected QRS event."""

    time: float
    klass: BeatClass = BeatClass.INCLUDED
    reason: MarkReason | None = None
    provenance: Provenance = Provenance.DETECTOR
    pwave: PwaveState = PwaveState.UNEVALUATED
    noise_value: float = 0.0

    @property
    def is_valid(self) -> bool:
        """True when the beat contributes to the output RRI series."""
        return self.klass in VALID_CLASSES

    @property
    def is_protected(self) -> bool:
        """Beats settled by a correction (or by hand) are never re-excluded."""
        if self.provenance is Provenance.MANUAL:
            return True
        if self.klass in (BeatClass.ADJUSTED, BeatClass.INTERPOLATED):
            return True
        return (
            self.klass is BeatClass.INCLUDED
            and self.provenance is Provenance.CORRECTION
        )


class RegionReason(enum.Enum):
    TRAINING = "TRAINING"
    IRREGULAR = "IRREGULAR"
    NOISE = "NOISE"
    MANUAL = "MANUAL"


#: Merge precedence when touching regions collapse into one.
_REGION_RANK = {
    RegionReason.TRAINING: 3,
    RegionReason.MANUAL: 2,
    RegionReason.NOISE: 1,
    RegionReason.IRREGULAR: 0,
}


@dataclass
class Region:
    """A contiguous span excluded from downstream analysis."""

    start: float
    end: float
    reason: RegionReason

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"region start {self.start} must precede end {self.end}")

    def overlaps(self, other: "Region") -> bool:
        return self.start < other.end and other.start < self.end


def normalize_regions(regions: list[Region]) -> list[Region]:
    """Sort regions and merge any that touch or overlap."""
    merged: list[Region] = []
    for region in sorted(regions, key=lambda r: (r.start, r.end)):
        if merged and region.start <= merged[-1].end:
            last = merged[-1]
            reason = max(last.reason, region.reason, key=_REGION_RANK.get)
            merged[-1] = Region(last.start, max(last.end, region.end), reason)
        else:
            merged.append(replace(region))
    return merged


@dataclass
class EcgRecord:
    """Uniformly sampled single-lead voltage series.

    ``samples`` is empty only for interval-only sources, in which case
    ``rri`` holds the raw interval sequence in seconds.
    """

    samples: np.ndarray
    sample_rate: float
    start_offset: float = 0.0
    source_format: SourceFormat = SourceFormat.TXT
    inverted: bool = False
    path: str | None = None
    rri: np.ndarray | None = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.samples.size == 0 and self.source_format is not SourceFormat.RRI_ONLY:
            raise ValueError("waveform sources must carry samples")
        if self.rri is not None:
            self.rri = np.asarray(self.rri, dtype=np.float64)

    @property
    def has_waveform(self) -> bool:
        return self.samples.size > 0

    @property
    def duration(self) -> float:
        """Record length in seconds."""
        if self.has_waveform:
            return self.samples.size / self.sample_rate
        if self.rri is not None and self.rri.size:
            return float(np.sum(self.rri))
        return 0.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, EcgRecord):
            return NotImplemented
        return (
            np.array_equal(self.samples, other.samples)
            and self.sample_rate == other.sample_rate
            and self.start_offset == other.start_offset
            and self.source_format == other.source_format
            and self.inverted == other.inverted
            and self.path == other.path
            and (
                (self.rri is None and other.rri is None)
                or (
                    self.rri is not None
                    and other.rri is not None
                    and np.array_equal(self.rri, other.rri)
                )
            )
        )


class AnnotationLabel(enum.Enum):
    """Closed vocabulary for reference annotations."""

    NORMAL = "Normal beat"
    PACED = "Paced beat"
    ATRIAL_PREMATURE = "Atrial premature beat"
    VENTRICULAR_ESCAPE = "Ventricular escape beat"
    FUSION_PACED = "Fusion of paced and normal beat"
    NODAL_PREMATURE = "Nodal (junctional) premature beat"
    LEFT_BUNDLE_BRANCH = "Left bundle branch block beat"
    RIGHT_BUNDLE_BRANCH = "Right bundle branch block beat"
    SUPRAVENTRICULAR = "Supraventricular premature or ectopic beat"
    PVC = "Premature ventricular contraction"
    UNCLASSIFIABLE = "Unclassifiable beat"
    VFLUTTER_WAVE = "Ventricular flutter wave"
    VFIB_START = "Start of ventricular flutter/fibrillation"
    VFIB_END = "End of ventricular flutter/fibrillation"
    QRS_ARTIFACT = "Isolated QRS-like artifact"
    SIGNAL_QUALITY = "Change in signal quality"
    RHYTHM_CHANGE = "Rhythm change"
    NONCONDUCTED_P = "Non-conducted P-wave (blocked APC)"
    COMMENT = "Comment annotation"


#: Labels that mark an actual heartbeat (as opposed to events/markers).
BEAT_LABELS = frozenset(
    {
        AnnotationLabel.NORMAL,
        AnnotationLabel.PACED,
        AnnotationLabel.ATRIAL_PREMATURE,
        AnnotationLabel.VENTRICULAR_ESCAPE,
        AnnotationLabel.FUSION_PACED,
        AnnotationLabel.NODAL_PREMATURE,
        AnnotationLabel.LEFT_BUNDLE_BRANCH,
        AnnotationLabel.RIGHT_BUNDLE_BRANCH,
        AnnotationLabel.SUPRAVENTRICULAR,
        AnnotationLabel.PVC,
        AnnotationLabel.UNCLASSIFIABLE,
    }
)


@dataclass
class ReferenceAnnotations:
    """Reference beat/event annotations with times in seconds."""

    entries: list[tuple[float, AnnotationLabel]] = field(default_factory=list)

    def beat_entries(self) -> list[tuple[float, AnnotationLabel]]:
        return [(t, lab) for t, lab in self.entries if lab in BEAT_LABELS]


class EditKind(enum.Enum):
    DELETE = "DELETE"
    ADD = "ADD"
    INTERPOLATE = "INTERPOLATE"
    RELOCATE = "RELOCATE"
    INVERT_SIGNAL = "INVERT_SIGNAL"
    REGION_OVERRIDE = "REGION_OVERRIDE"


@dataclass
class EditEntry:
    """One manual modification from the review step (append-only log)."""

    ordinal: int
    kind: EditKind
    target_time: float | None = None
    target_index: int | None = None
    params: dict = field(default_factory=dict)
    timestamp: str = ""


@dataclass
class DetectorParams:
    """Beat-identification stage parameters."""

    qrs_threshold: float = 1.0
    post_threshold: float = 0.25
    amplifier: float = 1.0
    invert: bool = False

    def __post_init__(self):
        if self.amplifier <= 0:
            raise ValueError("amplifier must be positive")
        if self.qrs_threshold < 0 or self.post_threshold < 0:
            raise ValueError("thresholds must be non-negative")


@dataclass
class IrregularityParams:
    """Regional-threshold and classification parameters."""

    rri_upper_frac: float = 1.20
    rri_lower_frac: float = 0.80
    grad_inc_frac: float = 0.10
    grad_dec_frac: float = 0.10
    hard_upper_bound: float = 1.5
    accept_min: float = 0.3
    accept_max: float = 1.8

    def __post_init__(self):
        if not 0 < self.rri_lower_frac < 1 < self.rri_upper_frac:
            raise ValueError("need 0 < lower_frac < 1 < upper_frac")
        if self.grad_inc_frac <= 0 or self.grad_dec_frac <= 0:
            raise ValueError("gradual thresholds must be positive")
        if not 0 < self.accept_min < self.hard_upper_bound <= self.accept_max:
            raise ValueError("acceptance bounds out of order")


@dataclass
class CorrectionParams:
    loops: int = 2
    analyze_pwaves: bool = True
    pwave_sensitivity: float = 1.0

    def __post_init__(self):
        if self.loops < 1:
            raise ValueError("loops must be >= 1")
        if self.pwave_sensitivity <= 0:
            raise ValueError("pwave_sensitivity must be positive")


@dataclass
class PipelineParams:
    detector: DetectorParams = field(default_factory=DetectorParams)
    irregularity: IrregularityParams = field(default_factory=IrregularityParams)
    correction: CorrectionParams = field(default_factory=CorrectionParams)
    noise_window_ms: float = 200.0


@dataclass
class Session:
    """Full pipeline state for one record."""

    sample_rate: float
    source_format: SourceFormat = SourceFormat.TXT
    record_path: str | None = None
    record_duration: float = 0.0
    start_offset: float = 0.0
    inverted: bool = False
    params: PipelineParams = field(default_factory=PipelineParams)
    beats: list[BeatMark] = field(default_factory=list)
    rri_input: list[float] | None = None
    regions: list[Region] = field(default_factory=list)
    edits: list[EditEntry] = field(default_factory=list)
    test_region: tuple[float, float] | None = None
    validation: dict | None = None

    def included_beats(self) -> list[BeatMark]:
        return [b for b in self.beats if b.is_valid]

    def active_beats(self) -> list[BeatMark]:
        """Beats still in the tachogram (everything except REMOVED)."""
        return [b for b in self.beats if b.klass is not BeatClass.REMOVED]

    def check_beats_sorted(self) -> None:
        times = [b.time for b in self.beats]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("session beats must be strictly increasing in time")


@dataclass
class RriSeries:
    """Inter-beat intervals over a subset of a session's beats.

    ``left_index``/``right_index`` point back into the full beat list, so
    the interval k runs from beat ``left_index[k]`` to ``right_index[k]``
    and ``right_index[k] == left_index[k + 1]`` while both exist.
    """

    durations: np.ndarray
    left_index: np.ndarray
    right_index: np.ndarray
    left_time: np.ndarray
    right_time: np.ndarray

    def __len__(self) -> int:
        return int(self.durations.size)


def _rri_over(session: Session, idx: list[int]) -> RriSeries:
    times = np.array([session.beats[i].time for i in idx], dtype=np.float64)
    if times.size < 2:
        empty_i = np.empty(0, dtype=np.intp)
        return RriSeries(np.empty(0), empty_i, empty_i, np.empty(0), np.empty(0))
    durations = np.diff(times)
    if np.any(durations <= 0):
        raise ValueError("beat times must be strictly increasing")
    index = np.asarray(idx, dtype=np.intp)
    return RriSeries(durations, index[:-1], index[1:], times[:-1], times[1:])


def build_rri(session: Session) -> RriSeries:
    """RRI series over the session's non-removed beats (the tachogram
    the detection and correction stages work on)."""
    idx = [i for i, b in enumerate(session.beats) if b.klass is not BeatClass.REMOVED]
    return _rri_over(session, idx)


def build_valid_rri(session: Session) -> RriSeries:
    """RRI series over valid beats only (the series handed downstream)."""
    idx = [i for i, b in enumerate(session.beats) if b.is_valid]
    return _rri_over(session, idx)
