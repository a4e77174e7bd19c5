"""Models for evaluation records, summaries and sweep reports."""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from .haystack import OracleRegistry


class EvalTask(BaseModel):
    """One question over one document, with its gold answer."""

    task_id: str = Field(..., description="Stable identifier")
    question: str = Field(..., description="Question to answer")
    document: str = Field(..., description="Full document text")
    gold_answer: str = Field(..., description="Reference answer")
    choices: Optional[List[str]] = Field(None, description="Options for multiple-choice items")
    cell: str = Field("all", description="Aggregation cell, e.g. haystack length")
    registry: Optional[OracleRegistry] = Field(None, description="Oracle registry, if known")
    task_kind: Optional[str] = Field(
        None, description="Selects an answer_<task_kind> prompt template when one is loaded"
    )


class TraceSummary(BaseModel):
    """Cost statistics of one pipeline run."""

    backend_calls: int = 0
    total_tokens: int = 0
    iterations: int = 0
    truncated: bool = False
    calls_by_stage: Dict[str, int] = Field(default_factory=dict)


class EvalRecord(BaseModel):
    """Scored outcome of one task."""

    task_id: str
    cell: str = "all"
    question: str = ""
    prediction: str = ""
    gold: str = ""
    choices: Optional[List[str]] = None
    em: int = Field(0, ge=0, le=1)
    f1: float = Field(0.0, ge=0.0, le=1.0)
    judge_score: Optional[float] = Field(None, ge=0.0, le=100.0)
    judge_unparsed: bool = False
    failed: bool = False
    error: Optional[str] = None
    trace_stats: TraceSummary = Field(default_factory=TraceSummary)


class CellSummary(BaseModel):
    """Mean scores for one aggregation cell."""

    cell: str
    n_items: int
    mean_em: float
    mean_f1: float
    failed: int
    backend_calls: int


class EvalSummary(BaseModel):
    """Per-cell and overall mean scores of an evaluation run."""

    n_items: int
    mean_em: float
    mean_f1: float
    mean_judge: Optional[float] = None
    failed: int
    backend_calls: int
    cells: List[CellSummary] = Field(default_factory=list)


class EvalReport(BaseModel):
    """Records plus summary of an evaluation run."""

    records: List[EvalRecord]
    summary: EvalSummary


class SweepRow(BaseModel):
    """Scores and cost of one sweep value."""

    value: str
    mean_em: float
    mean_f1: float
    failed: int
    backend_calls: int
    calls_by_stage: Dict[str, int] = Field(default_factory=dict)
    total_tokens: int = 0
    mean_iterations: float = 0.0
    truncated: int = 0


class SweepReport(BaseModel):
    """Table of sweep rows for one dimension."""

    dimension: str
    rows: List[SweepRow]
    extra: Dict[str, Any] = Field(default_factory=dict)
