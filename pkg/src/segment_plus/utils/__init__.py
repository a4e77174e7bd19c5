"""Common utility functions and helpers."""

from .exceptions import (
    SegmentPlusError,
    ConfigInvalid,
    EmptyDocument,
    NoteParseFailure,
    TemplateError,
    BackendError,
    BackendUnavailable,
    BackendRejected,
    BackendTimeout,
    NoiseTooShort,
    EmptyTaskSet,
    EmptySweep,
    JudgeUnparsed,
)

__all__ = [
    "SegmentPlusError",
    "ConfigInvalid",
    "EmptyDocument",
    "NoteParseFailure",
    "TemplateError",
    "BackendError",
    "BackendUnavailable",
    "BackendRejected",
    "BackendTimeout",
    "NoiseTooShort",
    "EmptyTaskSet",
    "EmptySweep",
    "JudgeUnparsed",
]
