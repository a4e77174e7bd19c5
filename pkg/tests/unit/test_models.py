"""Tests for Pydantic models."""

import pytest
from pydantic import ValidationError

from segment_plus.models import (
    BackendRequest,
    HaystackTask,
    Note,
    NoteKind,
    NoteLabel,
    OracleRegistry,
    PipelineConfig,
    PipelineMode,
    PipelineTrace,
    Segment,
    Stage,
    TaskKind,
    TraceEvent,
    TraceEventKind,
    TraceStats,
)


class TestModels:
    """Test suite for Pydantic models."""

    def test_note_defaults(self):
        """Test Note defaults to an unlabeled structured generation-0 note."""
        note = Note(evidence="A.", span=(3, 3))
        assert note.label == NoteLabel.UNLABELED
        assert note.kind == NoteKind.STRUCTURED
        assert note.generation == 0
        assert note.reasoning == ""

        # Test immutability (frozen model)
        with pytest.raises(ValidationError):
            note.evidence = "B."

    def test_note_span_rules(self):
        """Test span validation for gathered and merged notes."""
        with pytest.raises(ValidationError):
            Note(span=(2, 1), generation=1)
        with pytest.raises(ValidationError):
            Note(span=(0, 2), generation=0)
        merged = Note(span=(0, 2), generation=1)
        assert merged.span == (0, 2)

    def test_segment_model(self):
        """Test Segment fields."""
        seg = Segment(index=0, text="abc", token_count=1)
        assert seg.index == 0
        with pytest.raises(ValidationError):
            Segment(index=-1, text="abc", token_count=1)

    def test_pipeline_config_defaults(self):
        """Test PipelineConfig defaults and final note budget."""
        config = PipelineConfig()
        assert config.segment_size == 3000
        assert config.max_merge_batch_tokens == 3000
        assert config.final_context_limit == 3500
        assert config.prompt_overhead_reserve == 500
        assert config.max_iterations == 8
        assert config.parallelism == 8
        assert config.mode == PipelineMode.FULL
        assert config.final_note_budget == 3000

    def test_backend_request_validation(self):
        """Test BackendRequest rejects empty prompts."""
        req = BackendRequest(stage=Stage.GATHER, prompt="hi")
        assert req.params.temperature == 0.0
        with pytest.raises(ValidationError):
            BackendRequest(stage=Stage.GATHER, prompt="")

    def test_haystack_task_validation(self):
        """Test HaystackTask depth and length checks."""
        base = dict(
            task_id="t",
            kind=TaskKind.TWO_FACT,
            facts=["Mary took the apple.", "Mary moved to the garden."],
            question="Where is the apple?",
            gold_answer="garden",
            required_facts=[0, 1],
            target_tokens=4096,
            depths=[0.25, 0.75],
        )
        assert HaystackTask(**base).depths == [0.25, 0.75]
        with pytest.raises(ValidationError):
            HaystackTask(**{**base, "depths": [0.75, 0.25]})
        with pytest.raises(ValidationError):
            HaystackTask(**{**base, "depths": [0.5]})
        with pytest.raises(ValidationError):
            HaystackTask(**{**base, "target_tokens": 5000})
        with pytest.raises(ValidationError):
            HaystackTask(**{**base, "required_facts": [2]})

    def test_registry_from_task(self):
        """Test OracleRegistry built from a task."""
        task = HaystackTask(
            task_id="t",
            kind=TaskKind.SINGLE_FACT,
            facts=["Mary moved to the bathroom."],
            question="Where is Mary?",
            gold_answer="bathroom",
            required_facts=[0],
            depths=[0.5],
        )
        registry = OracleRegistry.from_task(task)
        assert registry.gold_answer == "bathroom"
        assert registry.required_sentences == ["Mary moved to the bathroom."]

    def test_trace_jsonl_roundtrip(self):
        """Test trace serialization keeps events and stats."""
        trace = PipelineTrace(
            events=[
                TraceEvent(seq=0, event=TraceEventKind.SEGMENTS, data={"count": 1}),
                TraceEvent(seq=1, event=TraceEventKind.ANSWER, stage=Stage.ANSWER, data={"answer": "x"}),
            ],
            stats=TraceStats(backend_calls=2, calls_by_stage={"answer": 1, "gather": 1}),
        )
        text = trace.to_jsonl()
        assert text.endswith("\n")
        assert text.splitlines()[-1].startswith('{"stats"')
        again = PipelineTrace.from_jsonl(text)
        assert again == trace
        assert again.stats.calls(Stage.GATHER) == 1
