"""Exception hierarchy.

Errors are grouped into families so the CLI can map them onto stable
exit codes: input/format problems, the minimum-duration rule, and
inconsistent pipeline state.
"""


class BeatcleanError(Exception):
    """Base class for all package errors."""


class InputFormatError(BeatcleanError):
    """A source file could not be understood."""


class UnreadableHeader(InputFormatError):
    """EDF/BDF/WFDB header is malformed or truncated."""


class MissingSampleRate(InputFormatError):
    """Text input carries no sample rate and no override was given."""


class UnsupportedFormat(InputFormatError):
    """File extension or content matches no supported format."""


class EmptyRecord(InputFormatError):
    """A waveform source contained no samples."""


class MalformedAnnotation(InputFormatError):
    """Reference annotation file could not be parsed."""


class CorruptSession(InputFormatError):
    """Session file is structurally invalid."""


class VersionMismatch(InputFormatError):
    """Session file was written by an incompatible format version."""


class MinimumDurationError(BeatcleanError):
    """Record is shorter than the 120 s required for analysis."""


class StateError(BeatcleanError):
    """An operation was applied to inconsistent or unsuitable state."""


class OverlappingRegions(StateError):
    """Refused to serialize regions that overlap."""


class EmptySignal(StateError):
    """Waveform operation called on a record without samples."""


class NoSamples(StateError):
    """Noise profiling requested for an interval-only record."""


class EmptyWindow(StateError):
    """Fewer than two usable intervals in a regional window."""


class WindowOutOfRange(StateError):
    """P-wave search window extends before the start of the record."""


class IneligibleInterval(StateError):
    """Interpolation requested for an interval that fails the split rule."""


class NotAPair(StateError):
    """Pair adjustment requested where no interval pair exists."""


class InsufficientBeats(StateError):
    """Too few detected beats to seed the training sections."""


class DurationTooLong(StateError):
    """Requested test region exceeds the record duration."""


class NoSavedRegion(StateError):
    """Test-region reuse requested but no prior region was saved."""
