"""End-to-end pipeline runs against the oracle backend."""

import asyncio

import pytest

from segment_plus.backend import OracleBackend
from segment_plus.haystack import generate_noise, split_sentences
from segment_plus.models import (
    NoteLabel,
    OracleRegistry,
    PipelineConfig,
    PipelineMode,
    PipelineTrace,
    Stage,
    TraceEventKind,
)
from segment_plus.pipeline import SegmentPlusPipeline, run_pipeline

pytestmark = pytest.mark.oracle

MARY = OracleRegistry(
    fact_sentences=["Mary moved to the bathroom."], gold_answer="bathroom", required_facts=[0]
)


async def run_oracle(task, doc, config, templates, counter):
    """Run the pipeline on a haystack task with its own oracle."""
    backend = OracleBackend(OracleRegistry.from_task(task), templates, counter)
    return await run_pipeline(task.question, doc, config, backend, templates, counter)


def model_labels(trace: PipelineTrace) -> int:
    return sum(1 for e in trace.of_kind(TraceEventKind.LABEL) if e.data["source"] == "model")


class TestModes:
    """Test suite for the four pipeline variants."""

    @pytest.mark.parametrize("kind", ["single_fact", "two_fact", "three_fact"])
    @pytest.mark.parametrize("length", [0, 4096, 16384])
    async def test_full_mode_answers(self, make_task, templates, counter, kind, length):
        """Test the full pipeline answers and keeps every required fact."""
        task, doc = make_task(kind, length)
        result = await run_oracle(task, doc, PipelineConfig(), templates, counter)
        assert result.answer == task.gold_answer
        for i in task.required_facts:
            assert task.facts[i] in result.final_note.evidence
        assert result.trace.stats.calls(Stage.ANSWER) == 1

    async def test_nolabel_skips_filter(self, make_task, templates, counter):
        """Test NoLabel issues no filter calls and labels nothing."""
        task, doc = make_task("two_fact", 8192)
        config = PipelineConfig(mode=PipelineMode.NOLABEL)
        result = await run_oracle(task, doc, config, templates, counter)
        assert result.answer == task.gold_answer
        assert result.trace.stats.calls(Stage.FILTER) == 0
        assert result.trace.of_kind(TraceEventKind.LABEL) == []
        assert result.trace.stats.n_kept == result.trace.stats.n_segments

    async def test_nostructure_free_text(self, make_task, templates, counter):
        """Test NoStructure gathers free text and still filters."""
        task, doc = make_task("single_fact", 8192)
        config = PipelineConfig(mode=PipelineMode.NOSTRUCTURE)
        result = await run_oracle(task, doc, config, templates, counter)
        assert result.answer == task.gold_answer
        gathers = result.trace.calls(Stage.GATHER)
        assert gathers
        assert all('"Evidence"' not in e.data["prompt"] for e in gathers)
        assert result.trace.stats.calls(Stage.FILTER) == model_labels(result.trace)

    async def test_normal_chunk_and_merge(self, make_task, templates, counter):
        """Test Normal mode uses neither structure nor filtering."""
        task, doc = make_task("three_fact", 8192)
        config = PipelineConfig(mode=PipelineMode.NORMAL)
        result = await run_oracle(task, doc, config, templates, counter)
        assert result.answer == task.gold_answer
        assert result.trace.stats.calls(Stage.FILTER) == 0
        prompts = [e.data["prompt"] for e in result.trace.calls()]
        assert all('"Evidence"' not in p for p in prompts)


class TestFiltering:
    """Test suite for rule and model filtering."""

    async def test_prefilter_removes_noise(self, templates, counter):
        """Test pure noise is removed by rule without filter calls."""
        doc = generate_noise(55_000, "noise-only", counter)
        backend = OracleBackend(MARY, templates, counter)
        config = PipelineConfig(segment_size=100)
        result = await run_pipeline("Where is Mary?", doc, config, backend, templates, counter)
        labels = result.trace.of_kind(TraceEventKind.LABEL)
        assert len(labels) >= 500
        assert all(e.data["label"] == NoteLabel.REMOVE.value for e in labels)
        assert all(e.data["source"] == "rule" for e in labels)
        assert result.trace.stats.calls(Stage.FILTER) == 0
        assert result.answer == "unknown"

    async def test_filter_calls_match_unlabeled(self, make_task, templates, counter):
        """Test one filter call per note left unlabeled by the rules."""
        task, doc = make_task("three_fact", 16384)
        result = await run_oracle(task, doc, PipelineConfig(segment_size=500), templates, counter)
        assert result.trace.stats.calls(Stage.FILTER) == model_labels(result.trace)
        assert 1 <= model_labels(result.trace) <= len(task.facts)

    async def test_all_removed_answers_unknown(self, make_task, templates, counter):
        """Test an empty survivor set still reaches the answer stage."""
        _, doc = make_task("single_fact", 4096)
        registry = OracleRegistry(
            fact_sentences=["Zed moved to the attic."], gold_answer="attic", required_facts=[0]
        )
        backend = OracleBackend(registry, templates, counter)
        config = PipelineConfig()
        result = await run_pipeline("Where is Zed?", doc, config, backend, templates, counter)
        assert result.answer == "unknown"
        assert result.trace.stats.n_kept == 0
        assert result.trace.stats.calls(Stage.MERGE) == 0
        assert result.final_note.evidence == ""


class TestTraceAccounting:
    """Test suite for trace arithmetic and determinism."""

    async def test_call_counts_add_up(self, templates, counter):
        """Test per-stage calls match segments, batches and the answer."""
        doc = generate_noise(30_000, "accounting", counter)
        backend = OracleBackend(MARY, templates, counter)
        config = PipelineConfig(
            mode=PipelineMode.NORMAL,
            segment_size=100,
            max_merge_batch_tokens=256,
            final_context_limit=600,
        )
        result = await run_pipeline("Where is Mary?", doc, config, backend, templates, counter)
        stats = result.trace.stats
        batches = sum(len(e.data["tokens"]) for e in result.trace.of_kind(TraceEventKind.BATCHES))
        assert stats.calls(Stage.GATHER) == stats.n_segments
        assert stats.calls(Stage.MERGE) == batches
        assert stats.calls(Stage.ANSWER) == 1
        assert stats.backend_calls == stats.n_segments + batches + 1
        assert stats.iterations >= 2
        assert len(result.trace.of_kind(TraceEventKind.ITERATION)) == stats.iterations
        assert stats.total_tokens > 0

    async def test_deterministic_across_parallelism(self, make_task, templates, counter):
        """Test traces are byte-identical at any parallelism."""
        task, doc = make_task("three_fact", 16384)
        traces = []
        for parallelism in (1, 8):
            config = PipelineConfig(segment_size=1000, parallelism=parallelism)
            result = await run_oracle(task, doc, config, templates, counter)
            traces.append(result.trace.to_jsonl())
        assert traces[0] == traces[1]

    async def test_trace_reloads(self, make_task, templates, counter):
        """Test a written trace reads back to the same events and stats."""
        task, doc = make_task("two_fact", 4096)
        trace = (await run_oracle(task, doc, PipelineConfig(), templates, counter)).trace
        assert PipelineTrace.from_jsonl(trace.to_jsonl()) == trace

    async def test_concurrent_runs_are_isolated(self, make_task, templates, counter):
        """Test concurrent runs on different tasks do not share state."""
        specs = [("single_fact", 1), ("two_fact", 2), ("three_fact", 3)]
        pairs = [make_task(kind, 8192, seed) for kind, seed in specs]
        results = await asyncio.gather(
            *(run_oracle(task, doc, PipelineConfig(), templates, counter) for task, doc in pairs)
        )
        assert [r.answer for r in results] == [task.gold_answer for task, _ in pairs]
        for (task, doc), result in zip(pairs, results):
            alone = await run_oracle(task, doc, PipelineConfig(), templates, counter)
            assert alone.trace.to_jsonl() == result.trace.to_jsonl()


class TestPipelineClass:
    """Test suite for SegmentPlusPipeline."""

    async def test_reuse_and_close(self, make_task, templates, counter):
        """Test one pipeline answers several questions, then closes."""
        task, doc = make_task("single_fact", 4096)
        backend = OracleBackend(OracleRegistry.from_task(task), templates, counter)
        async with SegmentPlusPipeline(backend, PipelineConfig(), templates, counter) as pipeline:
            first = await pipeline.run(task.question, doc)
            second = await pipeline.run(task.question, doc)
        assert first.answer == second.answer == task.gold_answer
        assert first.trace == second.trace


class TestShortDocument:
    """Test suite for documents that fit in one segment."""

    async def test_single_sentence(self, templates, counter):
        """Test a one-sentence document runs every stage and answers."""
        backend = OracleBackend(MARY, templates, counter)
        result = await run_pipeline(
            "Where is Mary?", "Mary moved to the bathroom.", PipelineConfig(), backend,
            templates, counter,
        )
        assert result.answer == "bathroom"
        [gather] = result.trace.of_kind(TraceEventKind.GATHER)
        assert gather.data["kind"] == "structured"
        assert gather.data["segment"] == 0
        assert result.trace.stats.n_segments == 1
        assert result.trace.stats.calls(Stage.GATHER) == 1
        assert result.trace.stats.calls(Stage.FILTER) == 1
        assert result.trace.stats.calls(Stage.MERGE) == 0
        assert result.trace.stats.calls(Stage.ANSWER) == 1


ALL_MODES = [PipelineMode.FULL, PipelineMode.NOLABEL, PipelineMode.NOSTRUCTURE, PipelineMode.NORMAL]


def _layered_config(mode: PipelineMode) -> PipelineConfig:
    """Small segments and budgets so merging runs over several batches."""
    return PipelineConfig(
        mode=mode, segment_size=100, max_merge_batch_tokens=256, final_context_limit=900
    )


class TestIsolation:
    """Test suite for what later stages are allowed to see."""

    @pytest.mark.parametrize("mode", ALL_MODES)
    async def test_later_prompts_hold_no_segment_text(self, make_task, templates, counter, mode):
        """Test filter, merge and answer prompts carry no noise sentence of the document."""
        task, doc = make_task("three_fact", 16384)
        result = await run_oracle(task, doc, _layered_config(mode), templates, counter)
        assert result.answer == task.gold_answer

        noise = [s for s in split_sentences(doc) if s not in task.facts and len(s.split()) >= 4]
        assert len(noise) > 100
        later = [e for e in result.trace.calls() if e.stage != Stage.GATHER]
        assert later
        for event in later:
            leaked = [s for s in noise if s in event.data["prompt"]]
            assert leaked == [], f"{event.stage.value} prompt quotes segment text"


class TestOrdering:
    """Test suite for document order across a whole run."""

    @pytest.mark.parametrize("mode", ALL_MODES)
    async def test_spans_strictly_increase(self, make_task, templates, counter, mode):
        """Test gather, label and merge events follow document order."""
        task, doc = make_task("three_fact", 16384)
        result = await run_oracle(task, doc, _layered_config(mode), templates, counter)
        trace = result.trace

        gathered = [e.data["segment"] for e in trace.of_kind(TraceEventKind.GATHER)]
        assert gathered == list(range(trace.stats.n_segments))

        labeled = [e.data["segment"] for e in trace.of_kind(TraceEventKind.LABEL)]
        assert labeled == sorted(set(labeled))

        merges = trace.of_kind(TraceEventKind.MERGE)
        if mode == PipelineMode.NOLABEL:
            assert trace.stats.iterations >= 2
        for iteration in {e.iteration for e in merges}:
            spans = [e.data["span"] for e in merges if e.iteration == iteration]
            assert all(lo <= hi for lo, hi in spans)
            assert all(prev[1] < nxt[0] for prev, nxt in zip(spans, spans[1:]))
