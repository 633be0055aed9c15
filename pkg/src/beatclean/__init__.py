"""beatclean: heartbeat detection and RR-interval artifact correction
for ambulatory single-lead ECG."""

from .model import (
    AnnotationLabel,
    BeatClass,
    BeatMark,
    CorrectionParams,
    DetectorParams,
    EcgRecord,
    EditEntry,
    EditKind,
    IrregularityParams,
    MarkReason,
    PipelineParams,
    Provenance,
    PwaveState,
    ReferenceAnnotations,
    Region,
    RegionReason,
    RriSeries,
    Session,
    SourceFormat,
    build_rri,
    build_valid_rri,
)
from .io import (
    export_session,
    import_session,
    read_record,
    read_reference_annotations,
    write_bad_intervals,
    write_rtimes,
)
from .detection import FilteredSignal, detect_qrs, post_filter, preprocess
from .noise import NoiseProfile, classify_noise, compute_noise_profile
from .irregularity import (
    OutlierFlags,
    RegionalStats,
    classify_beats,
    cumulative_sums,
    detect_outliers,
    detect_pwave,
    pair_sum_check,
    regional_stats,
    split_eligibility,
)
from .correction import (
    adjust_short_long,
    count_spectral_epochs,
    interpolate_long,
    mark_regions,
    remove_extra_beats,
    run_correction_loops,
)
from .validation import (
    BeatMatching,
    ValidationReport,
    compute_metrics,
    match_beats,
    noise_accuracy,
    nst_noise_schedule,
)
from .pipeline import (
    PipelineConfig,
    PipelineResult,
    RandomRegion,
    ReuseRegion,
    run_pipeline,
    select_test_region,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
