"""Readers and writers for ECG sources, annotations and pipeline outputs.

Supported inputs
----------------
* ``.txt``  one sample per line, optional ``fs=<Hz>`` header line
* ``.edf``  European Data Format (16-bit samples)
* ``.bdf``  BioSemi variant of EDF (24-bit samples)
* ``.hea``/``.dat``  WFDB records (formats 212 and 16)
* ``.rri``  one inter-beat interval in seconds per line (no waveform)

Outputs are ``.rtimes`` (valid beat times), ``.bi`` (excluded spans) and a
versioned JSON session file whose field names are frozen in
``docs/session_schema.md``.
"""

from __future__ import annotations

import json
import logging
import os
import re

import numpy as np

from .exceptions import (
    CorruptSession,
    EmptyRecord,
    MalformedAnnotation,
    MissingSampleRate,
    OverlappingRegions,
    UnreadableHeader,
    UnsupportedFormat,
    VersionMismatch,
)
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
    Session,
    SourceFormat,
)

log = logging.getLogger(__name__)

SESSION_VERSION = 1

#: Nominal resolution (Hz) assigned to interval-only records; it only
#: bounds the minimum spacing of manually added beats.
RRI_ONLY_SAMPLE_RATE = 1000.0


# --------------------------------------------------------------------------
# record readers
# --------------------------------------------------------------------------

_EXTENSION_FORMATS = {
    ".txt": SourceFormat.TXT,
    ".csv": SourceFormat.TXT,
    ".edf": SourceFormat.EDF,
    ".bdf": SourceFormat.BDF,
    ".hea": SourceFormat.WFDB,
    ".dat": SourceFormat.WFDB,
    ".rri": SourceFormat.RRI_ONLY,
}


def _sniff_format(path: str) -> SourceFormat:
    ext = os.path.splitext(path)[1].lower()
    if ext in _EXTENSION_FORMATS:
        return _EXTENSION_FORMATS[ext]
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head[:1] == b"\xff" and b"BIOSEMI" in head:
        return SourceFormat.BDF
    if head[:8] == b"0       ":
        return SourceFormat.EDF
    raise UnsupportedFormat(f"cannot determine format of {path!r}")


def read_record(
    path: str,
    format: SourceFormat | str = "auto",
    sample_rate_override: float | None = None,
) -> EcgRecord:
    """Read a single-lead record in any supported format.

    Parameters
    ----------
    path : str
        Input file.
    format : SourceFormat or "auto"
        Explicit format, or detect from extension/content.
    sample_rate_override : float, optional
        Required for text input without an ``fs=`` header line.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    if isinstance(format, str):
        fmt = _sniff_format(path) if format == "auto" else SourceFormat(format.upper())
    else:
        fmt = format
    if fmt is SourceFormat.TXT:
        return _read_txt(path, sample_rate_override)
    if fmt in (SourceFormat.EDF, SourceFormat.BDF):
        return _read_edf_family(path, fmt)
    if fmt is SourceFormat.WFDB:
        return _read_wfdb(path)
    if fmt is SourceFormat.RRI_ONLY:
        return _read_rri(path)
    raise UnsupportedFormat(str(fmt))


_FS_LINE = re.compile(r"^\s*fs\s*=\s*([0-9.eE+-]+)\s*$")


def _read_txt(path: str, sample_rate_override: float | None) -> EcgRecord:
    sample_rate = sample_rate_override
    values: list[float] = []
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            m = _FS_LINE.match(line)
            if m:
                sample_rate = float(m.group(1))
                continue
            try:
                values.append(float(line.split()[0]))
            except ValueError as exc:
                raise UnsupportedFormat(
                    f"{path}:{lineno + 1}: not a sample value: {line!r}"
                ) from exc
    if sample_rate is None:
        raise MissingSampleRate(f"{path}: no fs= header and no override given")
    if not values:
        raise EmptyRecord(path)
    return EcgRecord(
        samples=np.asarray(values),
        sample_rate=float(sample_rate),
        source_format=SourceFormat.TXT,
        path=path,
    )


def _read_rri(path: str) -> EcgRecord:
    intervals: list[float] = []
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                value = float(line.split()[0])
            except ValueError as exc:
                raise UnsupportedFormat(
                    f"{path}:{lineno + 1}: not an interval: {line!r}"
                ) from exc
            if value <= 0:
                raise UnsupportedFormat(f"{path}:{lineno + 1}: interval must be > 0")
            intervals.append(value)
    if not intervals:
        raise EmptyRecord(path)
    return EcgRecord(
        samples=np.empty(0),
        sample_rate=RRI_ONLY_SAMPLE_RATE,
        source_format=SourceFormat.RRI_ONLY,
        path=path,
        rri=np.asarray(intervals),
    )


def _ascii_field(raw: bytes, what: str) -> str:
    try:
        return raw.decode("ascii").strip()
    except UnicodeDecodeError as exc:
        raise UnreadableHeader(f"non-ASCII bytes in {what}") from exc


def _float_field(raw: bytes, what: str) -> float:
    text = _ascii_field(raw, what)
    try:
        return float(text)
    except ValueError as exc:
        raise UnreadableHeader(f"bad numeric field {what}: {text!r}") from exc


def _read_edf_family(path: str, fmt: SourceFormat) -> EcgRecord:
    """Parse an EDF or BDF file: 256-byte fixed header, 256 bytes per
    signal, then data records of 16-bit (EDF) or 24-bit (BDF) words."""
    with open(path, "rb") as fh:
        fixed = fh.read(256)
        if len(fixed) < 256:
            raise UnreadableHeader(f"{path}: truncated header")
        version = fixed[:8]
        if fmt is SourceFormat.BDF:
            if not (version[:1] == b"\xff" and version[1:8].strip() == b"BIOSEMI"):
                raise UnreadableHeader(f"{path}: not a BDF file")
        else:
            if version != b"0       ":
                raise UnreadableHeader(f"{path}: bad EDF version field {version!r}")
        n_records = int(_float_field(fixed[236:244], "record count"))
        record_duration = _float_field(fixed[244:252], "record duration")
        n_signals = int(_float_field(fixed[252:256], "signal count"))
        if n_signals <= 0 or record_duration <= 0:
            raise UnreadableHeader(f"{path}: invalid layout fields")

        per = fh.read(256 * n_signals)
        if len(per) < 256 * n_signals:
            raise UnreadableHeader(f"{path}: truncated signal headers")

        def column(offset: int, width: int) -> list[bytes]:
            base = offset * n_signals
            return [
                per[base + i * width : base + (i + 1) * width]
                for i in range(n_signals)
            ]

        labels = [_ascii_field(b, "label") for b in column(0, 16)]
        phys_min = [_float_field(b, "physical min") for b in column(16 + 80 + 8, 8)]
        phys_max = [
            _float_field(b, "physical max") for b in column(16 + 80 + 8 + 8, 8)
        ]
        dig_min = [
            _float_field(b, "digital min") for b in column(16 + 80 + 8 + 16, 8)
        ]
        dig_max = [
            _float_field(b, "digital max") for b in column(16 + 80 + 8 + 24, 8)
        ]
        # preceding per-signal fields: label 16, transducer 80, dimension 8,
        # phys min/max 8+8, dig min/max 8+8, prefiltering 80 -> offset 216
        samples_per_record = [
            int(_float_field(b, "samples per record")) for b in column(216, 8)
        ]
        data = fh.read()

    channel = 0
    for i, label in enumerate(labels):
        if "ECG" in label.upper() or "EKG" in label.upper():
            channel = i
            break

    word = 3 if fmt is SourceFormat.BDF else 2
    record_words = sum(samples_per_record)
    record_bytes = record_words * word
    if n_records < 0:  # -1 means "unknown"; infer from the file size
        n_records = len(data) // record_bytes if record_bytes else 0
    if len(data) < n_records * record_bytes:
        raise UnreadableHeader(f"{path}: data shorter than header promises")

    raw = np.frombuffer(data[: n_records * record_bytes], dtype=np.uint8)
    raw = raw.reshape(n_records, record_bytes)
    offsets = np.cumsum([0] + [n * word for n in samples_per_record])
    chunk = raw[:, offsets[channel] : offsets[channel + 1]]
    if fmt is SourceFormat.BDF:
        b = chunk.reshape(n_records, -1, 3).astype(np.int32)
        digital = b[:, :, 0] | (b[:, :, 1] << 8) | (b[:, :, 2] << 16)
        digital[digital >= (1 << 23)] -= 1 << 24
    else:
        b = chunk.reshape(n_records, -1, 2).astype(np.int32)
        digital = b[:, :, 0] | (b[:, :, 1] << 8)
        digital[digital >= (1 << 15)] -= 1 << 16
    digital = digital.reshape(-1).astype(np.float64)

    dmin, dmax = dig_min[channel], dig_max[channel]
    pmin, pmax = phys_min[channel], phys_max[channel]
    if dmax == dmin:
        raise UnreadableHeader(f"{path}: degenerate digital range on channel {channel}")
    physical = pmin + (digital - dmin) * (pmax - pmin) / (dmax - dmin)

    if physical.size == 0:
        raise EmptyRecord(path)
    return EcgRecord(
        samples=physical,
        sample_rate=samples_per_record[channel] / record_duration,
        source_format=fmt,
        path=path,
    )


def _read_wfdb(path: str) -> EcgRecord:
    """Read a WFDB record (header + signal file, formats 212 and 16)."""
    stem = os.path.splitext(path)[0]
    header_path = stem + ".hea"
    if not os.path.exists(header_path):
        raise UnreadableHeader(f"missing header file {header_path}")
    with open(header_path, "r", encoding="ascii", errors="replace") as fh:
        lines = [
            ln.strip()
            for ln in fh
            if ln.strip() and not ln.startswith("#")
        ]
    if not lines:
        raise UnreadableHeader(f"{header_path}: empty header")
    head = lines[0].split()
    if len(head) < 2:
        raise UnreadableHeader(f"{header_path}: bad record line")
    try:
        n_signals = int(head[1])
        sample_rate = float(head[2]) if len(head) > 2 else 250.0
        n_samples = int(head[3]) if len(head) > 3 else 0
    except ValueError as exc:
        raise UnreadableHeader(f"{header_path}: bad record line") from exc

    signals = []
    for line in lines[1 : 1 + n_signals]:
        parts = line.split()
        if len(parts) < 2:
            raise UnreadableHeader(f"{header_path}: bad signal line {line!r}")
        fmt_field = parts[1]
        fmt_code = int(fmt_field.split("x")[0].split(":")[0].split("+")[0])
        gain = 200.0
        baseline = 0.0
        if len(parts) > 2:
            gain_field = parts[2].split("/")[0]
            m = re.match(r"([0-9.eE+-]+)(?:\(([-0-9]+)\))?", gain_field)
            if m:
                gain = float(m.group(1)) or 200.0
                if m.group(2) is not None:
                    baseline = float(m.group(2))
        adc_zero = float(parts[4]) if len(parts) > 4 else 0.0
        if len(parts) <= 2 or "(" not in parts[2]:
            baseline = adc_zero
        description = " ".join(parts[8:]) if len(parts) > 8 else ""
        signals.append(
            {
                "file": parts[0],
                "format": fmt_code,
                "gain": gain,
                "baseline": baseline,
                "description": description,
            }
        )

    channel = 0
    for i, sig in enumerate(signals):
        if "ECG" in sig["description"].upper():
            channel = i
            break

    sig = signals[channel]
    data_path = os.path.join(os.path.dirname(header_path), sig["file"])
    with open(data_path, "rb") as fh:
        data = fh.read()

    same_file = [i for i, s in enumerate(signals) if s["file"] == sig["file"]]
    n_interleaved = len(same_file)
    slot = same_file.index(channel)

    if sig["format"] == 212:
        usable = len(data) - len(data) % 3
        b = np.frombuffer(data[:usable], dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        first = b[:, 0] | ((b[:, 1] & 0x0F) << 8)
        second = b[:, 2] | ((b[:, 1] & 0xF0) << 4)
        pairs = np.empty(b.shape[0] * 2, dtype=np.int32)
        pairs[0::2] = first
        pairs[1::2] = second
        pairs[pairs >= 2048] -= 4096
        digital = pairs
    elif sig["format"] == 16:
        usable = len(data) - len(data) % 2
        digital = np.frombuffer(data[:usable], dtype="<i2").astype(np.int32)
    else:
        raise UnsupportedFormat(f"WFDB signal format {sig['format']} not supported")

    frames = digital.size // n_interleaved
    digital = digital[: frames * n_interleaved].reshape(-1, n_interleaved)[:, slot]
    if n_samples:
        digital = digital[:n_samples]
    if digital.size == 0:
        raise EmptyRecord(path)
    physical = (digital.astype(np.float64) - sig["baseline"]) / sig["gain"]
    return EcgRecord(
        samples=physical,
        sample_rate=sample_rate,
        source_format=SourceFormat.WFDB,
        path=header_path,
    )


# --------------------------------------------------------------------------
# reference annotations
# --------------------------------------------------------------------------

#: WFDB annotation type codes -> display symbols (beat + event subset).
_WFDB_CODE_SYMBOLS = {
    1: "N", 2: "L", 3: "R", 4: "a", 5: "V", 6: "F", 7: "J", 8: "A", 9: "S",
    10: "E", 11: "j", 12: "/", 13: "Q", 14: "~", 16: "|", 22: '"', 25: "B",
    28: "+", 31: "!", 32: "[", 33: "]", 34: "e", 35: "n", 38: "f", 41: "r",
}

_SYMBOL_LABELS = {
    "N": AnnotationLabel.NORMAL,
    "L": AnnotationLabel.LEFT_BUNDLE_BRANCH,
    "R": AnnotationLabel.RIGHT_BUNDLE_BRANCH,
    "V": AnnotationLabel.PVC,
    "A": AnnotationLabel.ATRIAL_PREMATURE,
    "J": AnnotationLabel.NODAL_PREMATURE,
    "S": AnnotationLabel.SUPRAVENTRICULAR,
    "E": AnnotationLabel.VENTRICULAR_ESCAPE,
    "/": AnnotationLabel.PACED,
    "f": AnnotationLabel.FUSION_PACED,
    "Q": AnnotationLabel.UNCLASSIFIABLE,
    "!": AnnotationLabel.VFLUTTER_WAVE,
    "[": AnnotationLabel.VFIB_START,
    "]": AnnotationLabel.VFIB_END,
    "|": AnnotationLabel.QRS_ARTIFACT,
    "~": AnnotationLabel.SIGNAL_QUALITY,
    "+": AnnotationLabel.RHYTHM_CHANGE,
    "x": AnnotationLabel.NONCONDUCTED_P,
    '"': AnnotationLabel.COMMENT,
}

_NAME_LABELS = {label.value.lower(): label for label in AnnotationLabel}
_NAME_LABELS.update({label.name.lower(): label for label in AnnotationLabel})


def _label_for(symbol: str) -> AnnotationLabel:
    label = _SYMBOL_LABELS.get(symbol)
    if label is None:
        label = _NAME_LABELS.get(symbol.lower())
    if label is None:
        log.warning("unknown annotation label %r kept as Unclassifiable", symbol)
        label = AnnotationLabel.UNCLASSIFIABLE
    return label


def read_reference_annotations(
    path: str, sample_rate: float | None = None
) -> ReferenceAnnotations:
    """Read reference annotations from a WFDB annotation file or a
    two-column ``time label`` text export.

    For WFDB files the sample rate comes from a sibling ``.hea`` file
    unless passed explicitly.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if not blob.strip():
        return ReferenceAnnotations([])
    try:
        text = blob.decode("ascii")
    except UnicodeDecodeError:
        return _read_wfdb_annotations(path, blob, sample_rate)
    if all(ch.isprintable() or ch in "\r\n\t" for ch in text):
        return _read_text_annotations(path, text)
    return _read_wfdb_annotations(path, blob, sample_rate)


def _read_text_annotations(path: str, text: str) -> ReferenceAnnotations:
    entries: list[tuple[float, AnnotationLabel]] = []
    last_time = -np.inf
    for lineno, line in enumerate(text.splitlines()):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise MalformedAnnotation(f"{path}:{lineno + 1}: expected 'time label'")
        try:
            t = float(parts[0])
        except ValueError as exc:
            raise MalformedAnnotation(f"{path}:{lineno + 1}: bad time") from exc
        if t < last_time:
            raise MalformedAnnotation(f"{path}:{lineno + 1}: times must not decrease")
        last_time = t
        entries.append((t, _label_for(parts[1].strip())))
    return ReferenceAnnotations(entries)


def _read_wfdb_annotations(
    path: str, blob: bytes, sample_rate: float | None
) -> ReferenceAnnotations:
    """Decode the MIT annotation byte-pair stream."""
    if sample_rate is None:
        stem = os.path.splitext(path)[0]
        header = stem + ".hea"
        if not os.path.exists(header):
            raise MalformedAnnotation(
                f"{path}: need a sample rate (no sibling .hea found)"
            )
        with open(header, "r", encoding="ascii", errors="replace") as fh:
            head = fh.readline().split()
        try:
            sample_rate = float(head[2])
        except (IndexError, ValueError) as exc:
            raise MalformedAnnotation(f"{header}: cannot read sample rate") from exc

    if len(blob) % 2:
        blob = blob[:-1]
    pairs = np.frombuffer(blob, dtype=np.uint8).reshape(-1, 2)
    entries: list[tuple[float, AnnotationLabel]] = []
    sample = 0
    i = 0
    n = pairs.shape[0]
    while i < n:
        lo, hi = int(pairs[i, 0]), int(pairs[i, 1])
        code = hi >> 2
        delta = lo | ((hi & 0x03) << 8)
        if code == 59:  # SKIP: 4-byte interval follows, then the annotation pair
            if i + 3 >= n:
                break
            sample += (
                (int(pairs[i + 1, 0]) << 16)
                | (int(pairs[i + 1, 1]) << 24)
                | int(pairs[i + 2, 0])
                | (int(pairs[i + 2, 1]) << 8)
            )
            lo, hi = int(pairs[i + 3, 0]), int(pairs[i + 3, 1])
            code = hi >> 2
            sample += lo | ((hi & 0x03) << 8)
            i += 4
        elif code == 63:  # AUX: skip the string payload
            aux_len = delta
            i += 1 + (aux_len + 1) // 2
            continue
        elif code in (60, 61, 62):  # NUM / SUB / CHAN modifiers
            i += 1
            continue
        elif code == 0 and delta == 0:  # end of file
            break
        else:
            sample += delta
            i += 1
        if code == 0:
            continue
        symbol = _WFDB_CODE_SYMBOLS.get(code, "?")
        entries.append((sample / sample_rate, _label_for(symbol)))
    return ReferenceAnnotations(entries)


# --------------------------------------------------------------------------
# output writers
# --------------------------------------------------------------------------


def write_rtimes(beats: list[BeatMark], path: str) -> None:
    """Write valid beat times, one per line, six decimals, LF endings."""
    lines = [f"{b.time:.6f}\n" for b in beats if b.is_valid]
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.writelines(lines)


def write_bad_intervals(regions: list[Region], path: str) -> None:
    """Write excluded spans as ``start<TAB>end<TAB>reason`` lines."""
    ordered = sorted(regions, key=lambda r: (r.start, r.end))
    for a, b in zip(ordered, ordered[1:]):
        if b.start < a.end:
            raise OverlappingRegions(
                f"regions overlap: [{a.start}, {a.end}] and [{b.start}, {b.end}]"
            )
    with open(path, "w", encoding="ascii", newline="") as fh:
        for r in ordered:
            fh.write(f"{r.start:.6f}\t{r.end:.6f}\t{r.reason.value}\n")


# --------------------------------------------------------------------------
# session export / import
# --------------------------------------------------------------------------


def _session_payload(session: Session) -> dict:
    session.check_beats_sorted()
    p = session.params
    payload = {
        "version": SESSION_VERSION,
        "sample_rate": session.sample_rate,
        "source_format": session.source_format.value,
        "record_path": session.record_path,
        "record_duration": session.record_duration,
        "start_offset": session.start_offset,
        "inverted": session.inverted,
        "params": {
            "qrs_threshold": p.detector.qrs_threshold,
            "post_threshold": p.detector.post_threshold,
            "amplifier": p.detector.amplifier,
            "invert": p.detector.invert,
            "rri_upper_frac": p.irregularity.rri_upper_frac,
            "rri_lower_frac": p.irregularity.rri_lower_frac,
            "grad_inc_frac": p.irregularity.grad_inc_frac,
            "grad_dec_frac": p.irregularity.grad_dec_frac,
            "hard_upper_bound": p.irregularity.hard_upper_bound,
            "accept_min": p.irregularity.accept_min,
            "accept_max": p.irregularity.accept_max,
            "loops": p.correction.loops,
            "analyze_pwaves": p.correction.analyze_pwaves,
            "pwave_sensitivity": p.correction.pwave_sensitivity,
            "noise_window_ms": p.noise_window_ms,
        },
        "test_region": list(session.test_region) if session.test_region else None,
        "beats": [
            {
                "t": b.time,
                "class": b.klass.value,
                "reason": b.reason.value if b.reason else None,
                "prov": b.provenance.value,
                "pwave": b.pwave.value,
                "noise": b.noise_value,
            }
            for b in session.beats
        ],
        "rri_input": session.rri_input,
        "regions": [
            {"start": r.start, "end": r.end, "reason": r.reason.value}
            for r in session.regions
        ],
        "edits": [
            {
                "ordinal": e.ordinal,
                "kind": e.kind.value,
                "target_time": e.target_time,
                "target_index": e.target_index,
                "params": e.params,
                "timestamp": e.timestamp,
            }
            for e in session.edits
        ],
        "validation": session.validation,
    }
    return payload


def export_session(session: Session, path: str) -> None:
    """Write a session as versioned JSON; re-exporting an unchanged
    session produces byte-identical output."""
    payload = _session_payload(session)
    with open(path, "w", encoding="ascii", newline="") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


_REASON_BY_VALUE = {r.value: r for r in MarkReason}


def import_session(path: str) -> Session:
    """Read a session file back; inverse of :func:`export_session`."""
    try:
        with open(path, "r", encoding="ascii") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptSession(f"{path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise CorruptSession(f"{path}: top level must be an object")
    version = payload.get("version")
    if version != SESSION_VERSION:
        raise VersionMismatch(
            f"{path}: session version {version!r}, expected {SESSION_VERSION}"
        )
    try:
        pp = payload["params"]
        params = PipelineParams(
            detector=DetectorParams(
                qrs_threshold=pp["qrs_threshold"],
                post_threshold=pp["post_threshold"],
                amplifier=pp["amplifier"],
                invert=pp["invert"],
            ),
            irregularity=IrregularityParams(
                rri_upper_frac=pp["rri_upper_frac"],
                rri_lower_frac=pp["rri_lower_frac"],
                grad_inc_frac=pp["grad_inc_frac"],
                grad_dec_frac=pp["grad_dec_frac"],
                hard_upper_bound=pp["hard_upper_bound"],
                accept_min=pp["accept_min"],
                accept_max=pp["accept_max"],
            ),
            correction=CorrectionParams(
                loops=pp["loops"],
                analyze_pwaves=pp["analyze_pwaves"],
                pwave_sensitivity=pp["pwave_sensitivity"],
            ),
            noise_window_ms=pp["noise_window_ms"],
        )
        beats = [
            BeatMark(
                time=b["t"],
                klass=BeatClass(b["class"]),
                reason=_REASON_BY_VALUE[b["reason"]] if b["reason"] else None,
                provenance=Provenance(b["prov"]),
                pwave=PwaveState(b["pwave"]),
                noise_value=b["noise"],
            )
            for b in payload["beats"]
        ]
        regions = [
            Region(r["start"], r["end"], RegionReason(r["reason"]))
            for r in payload["regions"]
        ]
        edits = [
            EditEntry(
                ordinal=e["ordinal"],
                kind=EditKind(e["kind"]),
                target_time=e["target_time"],
                target_index=e["target_index"],
                params=e["params"],
                timestamp=e["timestamp"],
            )
            for e in payload["edits"]
        ]
        test_region = payload["test_region"]
        session = Session(
            sample_rate=payload["sample_rate"],
            source_format=SourceFormat(payload["source_format"]),
            record_path=payload["record_path"],
            record_duration=payload["record_duration"],
            start_offset=payload["start_offset"],
            inverted=payload["inverted"],
            params=params,
            beats=beats,
            rri_input=payload["rri_input"],
            regions=regions,
            edits=edits,
            test_region=tuple(test_region) if test_region else None,
            validation=payload["validation"],
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptSession(f"{path}: {exc!r}") from exc
    session.check_beats_sorted()
    return session
