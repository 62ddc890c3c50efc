"""Exception types raised across the toolkit."""


class CsiError(Exception):
    """Base class for all capture and processing errors."""


class NotAPcap(CsiError):
    """Input does not start with a classic pcap global header."""


class NoCsiFrames(CsiError):
    """No valid CSI frames were found in the input."""


class MixedSubcarrierCount(CsiError):
    """Subcarrier count changed mid-capture (corrupt or mixed capture)."""


class MixedStreams(CsiError):
    """Capture contains more than one core/spatial-stream pair."""


class SchemaViolation(CsiError):
    """A structured text input does not conform to its format."""


class TooFewFrames(CsiError):
    """Operation needs more frames than the capture provides."""


class DegenerateSpan(CsiError):
    """All timestamps are equal; no time axis to resample over."""


class ShapeMismatch(CsiError):
    """Array shape is inconsistent with the subcarrier layout."""


class CutoffAboveNyquist(CsiError):
    """Filter cutoff is at or above half the sampling rate."""


class NonIntegerDecimation(CsiError):
    """Sample rate is not an integer multiple of the target rate."""


class ZeroVariance(CsiError):
    """A frame is constant, so its correlation is undefined."""


class EmptyCalibrationSet(CsiError):
    """Calibration was requested with no input series."""


class WindowTooLarge(CsiError):
    """Analysis window exceeds the series length."""


class InputTooShort(CsiError):
    """Series is shorter than the analysis requires."""


class GapInGroundTruth(CsiError):
    """Ground-truth intervals overlap, leave gaps, or miss the duration."""


class RateMismatch(CsiError):
    """Sample rates of the compared series disagree."""


class UnsortedEvents(CsiError):
    """Event timestamps are not in ascending order."""


class InvalidScript(CsiError):
    """Synthesis script violates its constraints."""
