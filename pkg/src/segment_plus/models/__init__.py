"""Pydantic models for pipeline data types."""

from .enums import (
    Stage,
    NoteLabel,
    NoteKind,
    PipelineMode,
    EvidenceMerge,
    TraceEventKind,
    TaskKind,
    SweepDimension,
)
from .base import (
    Segment,
    Note,
    PipelineConfig,
    TraceEvent,
    TraceStats,
    PipelineTrace,
    PipelineResult,
)
from .requests import (
    GenerationParams,
    BackendRequest,
    Usage,
    BackendResponse,
)
from .haystack import (
    HAYSTACK_LENGTHS,
    HaystackTask,
    OracleRegistry,
)
from .evaluation import (
    EvalTask,
    TraceSummary,
    EvalRecord,
    CellSummary,
    EvalSummary,
    EvalReport,
    SweepRow,
    SweepReport,
)

__all__ = [
    # Enums
    "Stage",
    "NoteLabel",
    "NoteKind",
    "PipelineMode",
    "EvidenceMerge",
    "TraceEventKind",
    "TaskKind",
    "SweepDimension",
    # Base models
    "Segment",
    "Note",
    "PipelineConfig",
    "TraceEvent",
    "TraceStats",
    "PipelineTrace",
    "PipelineResult",
    # Backend exchange models
    "GenerationParams",
    "BackendRequest",
    "Usage",
    "BackendResponse",
    # Haystack models
    "HAYSTACK_LENGTHS",
    "HaystackTask",
    "OracleRegistry",
    # Evaluation models
    "EvalTask",
    "TraceSummary",
    "EvalRecord",
    "CellSummary",
    "EvalSummary",
    "EvalReport",
    "SweepRow",
    "SweepReport",
]
