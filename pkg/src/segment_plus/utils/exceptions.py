"""Custom exceptions for the Segment+ pipeline."""

from typing import Optional


class SegmentPlusError(Exception):
    """Base exception for all pipeline-related errors."""

    pass


class ConfigInvalid(SegmentPlusError):
    """A pipeline configuration value violates its constraint."""

    def __init__(self, field: str, message: Optional[str] = None):
        """Initialize with the name of the offending field.

        Args:
            field: Name of the first violated configuration field.
            message: Optional human-readable detail.
        """
        self.field = field
        super().__init__(message or field)


class EmptyDocument(SegmentPlusError):
    """The input document is empty after trimming."""

    pass


class NoteParseFailure(SegmentPlusError):
    """No JSON object could be extracted from a model response."""

    pass


class TemplateError(SegmentPlusError):
    """A prompt template is missing slots or declares unknown ones."""

    pass


class BackendError(SegmentPlusError):
    """Language-model backend error."""

    pass


class BackendUnavailable(BackendError):
    """Backend could not be reached after exhausting retries."""

    pass


class BackendRejected(BackendError):
    """Backend refused the request with a non-retryable status."""

    def __init__(self, status_code: int, message: str = ""):
        """Initialize with the HTTP status code.

        Args:
            status_code: Status code returned by the endpoint.
            message: Response body or detail.
        """
        self.status_code = status_code
        super().__init__(f"HTTP {status_code}: {message}" if message else f"HTTP {status_code}")


class BackendTimeout(BackendError):
    """Backend request timed out on every attempt."""

    pass


class NoiseTooShort(SegmentPlusError):
    """Noise corpus has fewer tokens than the requested haystack length."""

    pass


class EmptyTaskSet(SegmentPlusError):
    """Evaluation was asked to run on zero tasks."""

    pass


class EmptySweep(SegmentPlusError):
    """Sweep was asked to run over zero values."""

    pass


class JudgeUnparsed(SegmentPlusError):
    """Judge output contained neither a score nor a verdict."""

    pass
