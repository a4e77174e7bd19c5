"""Core pydantic models shared by every pipeline module."""

import json
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .enums import (
    EvidenceMerge,
    NoteKind,
    NoteLabel,
    PipelineMode,
    Stage,
    TraceEventKind,
)


class Segment(BaseModel):
    """An ordered, token-bounded slice of the source document."""

    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=0, description="0-based position in the document")
    text: str = Field(..., description="Verbatim slice of the document")
    token_count: int = Field(..., ge=0, description="Tokens under the configured counter")


class Note(BaseModel):
    """Structured record gathered from, or merged over, a run of segments."""

    model_config = ConfigDict(frozen=True)

    evidence: str = Field("", description="Verbatim source quotations")
    reasoning: str = Field("", description="Model commentary (free-text answer for free-text notes)")
    label: NoteLabel = Field(NoteLabel.UNLABELED, description="Filter verdict")
    span: Tuple[int, int] = Field((0, 0), description="Inclusive range of covered segment indices")
    generation: int = Field(0, ge=0, description="Merge iteration that produced the note")
    kind: NoteKind = Field(NoteKind.STRUCTURED, description="Structured or free-text content")

    @model_validator(mode="after")
    def _check_span(self) -> "Note":
        start, end = self.span
        if start < 0 or end < start:
            raise ValueError(f"Invalid span {self.span}")
        if self.generation == 0 and start != end:
            raise ValueError("A generation-0 note covers exactly one segment")
        return self


class PipelineConfig(BaseModel):
    """Token budgets, mode switches and iteration caps for one run.

    Bounds are checked by ``core.validate_config`` rather than by pydantic so
    that the first violated constraint can be reported by name.
    """

    model_config = ConfigDict(frozen=True)

    segment_size: int = Field(3000, description="Max tokens per segment")
    max_merge_batch_tokens: int = Field(3000, description="Max serialized note tokens per merge batch")
    final_context_limit: int = Field(3500, description="Token window of the answering prompt")
    prompt_overhead_reserve: int = Field(500, description="Tokens reserved for the answer prompt text")
    max_iterations: int = Field(8, description="Cap on merge iterations")
    parallelism: int = Field(8, description="Max in-flight backend calls")
    mode: PipelineMode = Field(PipelineMode.FULL, description="Pipeline variant")
    evidence_merge: EvidenceMerge = Field(
        EvidenceMerge.MODEL_MERGE, description="How evidence is combined when merging"
    )
    temperature: float = Field(0.0, description="Sampling temperature")
    model: str = Field("gpt-3.5-turbo", description="Model name sent to the HTTP backend")
    max_output_tokens: int = Field(1024, description="Completion token cap per call")

    @property
    def final_note_budget(self) -> int:
        """Token budget the final merged note must fit."""
        return self.final_context_limit - self.prompt_overhead_reserve


class TraceEvent(BaseModel):
    """One ordered entry of a pipeline trace."""

    model_config = ConfigDict(frozen=True)

    seq: int = Field(..., ge=0, description="Position in the trace")
    event: TraceEventKind = Field(..., description="Event kind")
    stage: Optional[Stage] = Field(None, description="Stage the event belongs to")
    iteration: Optional[int] = Field(None, description="Merge iteration (stage 2 only)")
    data: Dict[str, Any] = Field(default_factory=dict, description="Event payload")


class TraceStats(BaseModel):
    """Aggregate counters derived from a trace."""

    n_segments: int = 0
    n_notes: int = 0
    n_kept: int = 0
    calls_by_stage: Dict[str, int] = Field(default_factory=dict)
    backend_calls: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    iterations: int = 0
    truncated: bool = False

    @property
    def total_tokens(self) -> int:
        """Prompt plus completion tokens."""
        return self.prompt_tokens + self.completion_tokens

    def calls(self, stage: Stage) -> int:
        """Number of backend calls made for a stage."""
        return self.calls_by_stage.get(stage.value, 0)


class PipelineTrace(BaseModel):
    """Ordered log of stage events for one pipeline run."""

    events: List[TraceEvent] = Field(default_factory=list)
    stats: TraceStats = Field(default_factory=TraceStats)

    @property
    def truncated(self) -> bool:
        """Whether the final note was cut to fit the budget."""
        return self.stats.truncated

    def of_kind(self, kind: TraceEventKind) -> List[TraceEvent]:
        """Events of one kind, in trace order."""
        return [e for e in self.events if e.event == kind]

    def calls(self, stage: Optional[Stage] = None) -> List[TraceEvent]:
        """Backend call events, optionally restricted to one stage."""
        return [
            e
            for e in self.events
            if e.event == TraceEventKind.CALL and (stage is None or e.stage == stage)
        ]

    def to_jsonl(self) -> str:
        """Serialize as line-delimited JSON, stats record last."""
        lines = [
            json.dumps(e.model_dump(mode="json"), ensure_ascii=False, sort_keys=True)
            for e in self.events
        ]
        lines.append(
            json.dumps(
                {"stats": self.stats.model_dump(mode="json")},
                ensure_ascii=False,
                sort_keys=True,
            )
        )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "PipelineTrace":
        """Parse a trace written by ``to_jsonl``."""
        events: List[TraceEvent] = []
        stats = TraceStats()
        for line in text.splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            if "stats" in record and "event" not in record:
                stats = TraceStats(**record["stats"])
            else:
                events.append(TraceEvent(**record))
        return cls(events=events, stats=stats)


class PipelineResult(BaseModel):
    """Answer, final note and trace of a pipeline run."""

    answer: str = Field(..., description="Trimmed answer text")
    final_note: Note = Field(..., description="Note used as answering context")
    trace: PipelineTrace = Field(..., description="Ordered stage events")
