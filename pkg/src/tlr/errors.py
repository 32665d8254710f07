"""Exception types shared across the toolkit."""


class TlrError(Exception):
    """Base class for all toolkit errors."""


class NonPositiveDepth(TlrError):
    """A projection helper was given a depth <= 0."""


class DetectorUnavailable(TlrError):
    """A remote detector backend could not be reached or timed out."""


class InvalidScenario(TlrError):
    """A simulation scenario violates its own constraints."""


class ParseError(TlrError):
    """A data file could not be parsed.

    ``line`` is 1-based when the format is line-oriented, else None.
    """

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class VersionMismatch(TlrError):
    """A data file declares an unsupported format version."""


class UnknownRoute(TlrError):
    """A route identifier is not known to the prior map being transferred."""


class LengthMismatch(TlrError):
    """Two sequences that must align frame-for-frame have different lengths."""


class NoGroundTruth(TlrError):
    """A metric is undefined because a class has no ground-truth instances."""


class UnknownCandidate(TlrError):
    """A curation request referenced a candidate id that does not exist."""


class InvalidGroup(TlrError):
    """A curation decision referenced a malformed group identifier."""


class FrameNotFound(TlrError):
    """No log frame exists at the requested timestamp."""


class PointIndexOutOfRange(TlrError):
    """A LiDAR point index is outside the frame's scan."""


class PendingRemain(TlrError):
    """A save was requested while undecided candidates remain."""
