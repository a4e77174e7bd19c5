"""Enumerations for the Segment+ pipeline."""

from enum import Enum


class Stage(str, Enum):
    """Pipeline stage a backend request belongs to."""

    GATHER = "gather"
    FILTER = "filter"
    MERGE = "merge"
    ANSWER = "answer"
    JUDGE = "judge"


class NoteLabel(str, Enum):
    """Filter verdict attached to a note."""

    UNLABELED = "unlabeled"
    KEEP = "keep"
    REMOVE = "remove"


class NoteKind(str, Enum):
    """Shape of a note's content.

    Structured notes carry Evidence and Reasoning; free-text notes carry a
    plain answer in ``reasoning`` and are used by the ablation modes.
    """

    STRUCTURED = "structured"
    FREE_TEXT = "free_text"


class PipelineMode(str, Enum):
    """Pipeline variant.

    - FULL: structured notes and filtering
    - NOLABEL: structured notes, no filtering
    - NOSTRUCTURE: free-text answers, filtering
    - NORMAL: free-text answers, no filtering (chunk and merge)
    """

    FULL = "full"
    NOLABEL = "nolabel"
    NOSTRUCTURE = "nostructure"
    NORMAL = "normal"


class EvidenceMerge(str, Enum):
    """How evidence is combined when merging a batch."""

    MODEL_MERGE = "model_merge"
    PROGRAMMATIC_CONCAT = "programmatic_concat"


class TraceEventKind(str, Enum):
    """Kinds of events recorded in a pipeline trace."""

    SEGMENTS = "segments"
    GATHER = "gather"
    LABEL = "label"
    BATCHES = "batches"
    MERGE = "merge"
    ITERATION = "iteration"
    TRUNCATION = "truncation"
    ANSWER = "answer"
    CALL = "call"


class TaskKind(str, Enum):
    """Haystack task shapes by number of chained facts."""

    SINGLE_FACT = "single_fact"
    TWO_FACT = "two_fact"
    THREE_FACT = "three_fact"


class SweepDimension(str, Enum):
    """Configuration dimension varied by a sweep."""

    SEGMENT_SIZE = "segment_size"
    MODE = "mode"
