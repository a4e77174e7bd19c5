"""End-to-end pipeline: segment, gather and filter, reduce, answer."""

import logging
from typing import List, Optional

from segment_plus.backend.abstract import AbstractBackend
from segment_plus.core import validate_config
from segment_plus.models import (
    GenerationParams,
    Note,
    NoteKind,
    NoteLabel,
    PipelineConfig,
    PipelineMode,
    PipelineResult,
    Segment,
    Stage,
    TraceEventKind,
)
from segment_plus.tokenwork import TokenCounter, default_counter, segment_text

from .stages import answer_question, filter_note, gather_note, prefilter_note, reduce_notes
from .templates import PromptTemplates, default_templates
from .trace import CallScheduler, TraceRecorder

logger = logging.getLogger(__name__)

STRUCTURED_MODES = (PipelineMode.FULL, PipelineMode.NOLABEL)
FILTERED_MODES = (PipelineMode.FULL, PipelineMode.NOSTRUCTURE)


async def run_pipeline(
    question: str,
    doc: str,
    config: PipelineConfig,
    backend: AbstractBackend,
    templates: Optional[PromptTemplates] = None,
    counter: Optional[TokenCounter] = None,
    *,
    task_kind: Optional[str] = None,
) -> PipelineResult:
    """Answer a question over a long document.

    Args:
        question: Question to answer.
        doc: Full document text.
        config: Pipeline configuration; validated before any backend call.
        backend: Language-model backend.
        templates: Prompt templates (shipped defaults if omitted).
        counter: Token counter (built-in counter if omitted).
        task_kind: Optional key selecting a per-task answer template.

    Returns:
        Answer, final note and full trace.

    Raises:
        ConfigInvalid: If the configuration is invalid.
        EmptyDocument: If the document is blank.
        BackendError: Propagated from the backend.
    """
    validate_config(config)
    templates = templates or default_templates()
    counter = counter or default_counter()
    recorder = TraceRecorder()
    scheduler = CallScheduler(backend, config.parallelism, recorder)
    params = GenerationParams(
        temperature=config.temperature, max_output_tokens=config.max_output_tokens
    )
    structured = config.mode in STRUCTURED_MODES

    segments = segment_text(doc, config, counter)
    recorder.n_segments = len(segments)
    recorder.add(
        TraceEventKind.SEGMENTS,
        count=len(segments),
        token_counts=[s.token_count for s in segments],
    )
    logger.info(f"Segmented document into {len(segments)} segments ({config.mode.value})")

    # Stage 1: gather
    async def _gather(segment: Segment, b: AbstractBackend) -> Note:
        return await gather_note(
            question, segment, b, templates, structured=structured, params=params, counter=counter
        )

    notes = await scheduler.map(segments, _gather)
    for note in notes:
        recorder.add(
            TraceEventKind.GATHER,
            stage=Stage.GATHER,
            segment=note.span[0],
            kind=note.kind.value,
            evidence=note.evidence,
            reasoning=note.reasoning,
        )
    recorder.n_notes = len(notes)

    # Stage 1: filter
    if config.mode in FILTERED_MODES:
        notes = await _label_notes(question, notes, scheduler, templates, params, recorder)
        survivors = [n for n in notes if n.label == NoteLabel.KEEP]
    else:
        survivors = list(notes)
    recorder.n_kept = len(survivors)
    logger.info(f"{len(survivors)} of {len(notes)} notes survive filtering")

    if not survivors:
        kind = NoteKind.STRUCTURED if structured else NoteKind.FREE_TEXT
        survivors = [Note(kind=kind)]

    # Stage 2: reduce
    final_note = await reduce_notes(
        question, survivors, backend, templates, config, counter, trace=recorder
    )

    # Stage 3: answer from the final note only
    async def _answer(b: AbstractBackend) -> str:
        return await answer_question(
            question, final_note, b, templates, task_kind, params=params
        )

    answer = await scheduler.one(_answer)
    recorder.add(TraceEventKind.ANSWER, stage=Stage.ANSWER, answer=answer)
    logger.info(f"Answered after {recorder.iterations} merge iterations")

    return PipelineResult(answer=answer, final_note=final_note, trace=recorder.build())


async def _label_notes(
    question: str,
    notes: List[Note],
    scheduler: CallScheduler,
    templates: PromptTemplates,
    params: GenerationParams,
    recorder: TraceRecorder,
) -> List[Note]:
    """Run the rule prefilter, then the model filter on notes it left unlabeled."""
    prefiltered = [prefilter_note(n) for n in notes]
    pending = [n for n in prefiltered if n.label == NoteLabel.UNLABELED]

    async def _filter(note: Note, b: AbstractBackend) -> Note:
        return await filter_note(question, note, b, templates, params=params)

    judged = {n.span: n for n in await scheduler.map(pending, _filter)}

    labeled: List[Note] = []
    for note in prefiltered:
        source = "rule"
        if note.span in judged:
            note = judged[note.span]
            source = "model"
        recorder.add(
            TraceEventKind.LABEL,
            stage=Stage.FILTER,
            segment=note.span[0],
            label=note.label.value,
            source=source,
        )
        labeled.append(note)
    return labeled


class SegmentPlusPipeline:
    """Question answering over long documents with a fixed backend and settings.

    Bundles the configuration, backend, templates and token counter so that
    many questions can be asked with the same setup.
    """

    def __init__(
        self,
        backend: AbstractBackend,
        config: Optional[PipelineConfig] = None,
        templates: Optional[PromptTemplates] = None,
        counter: Optional[TokenCounter] = None,
    ):
        """Initialize the pipeline.

        Args:
            backend: Language-model backend.
            config: Pipeline configuration (defaults if omitted).
            templates: Prompt templates (shipped defaults if omitted).
            counter: Token counter (built-in counter if omitted).

        Raises:
            ConfigInvalid: If the configuration is invalid.
        """
        self._config = config or PipelineConfig()
        validate_config(self._config)
        self._backend = backend
        self._templates = templates or default_templates()
        self._counter = counter or default_counter()

        logger.info(f"Pipeline initialized (mode={self._config.mode.value})")

    @property
    def config(self) -> PipelineConfig:
        """Get the pipeline configuration."""
        return self._config

    @property
    def backend(self) -> AbstractBackend:
        """Get the backend instance."""
        return self._backend

    async def run(
        self, question: str, doc: str, task_kind: Optional[str] = None
    ) -> PipelineResult:
        """Answer one question over one document."""
        return await run_pipeline(
            question,
            doc,
            self._config,
            self._backend,
            self._templates,
            self._counter,
            task_kind=task_kind,
        )

    async def close(self) -> None:
        """Release the backend."""
        await self._backend.aclose()

    async def __aenter__(self) -> "SegmentPlusPipeline":
        return self

    async def __aexit__(self, *exc_info: object) -> None:
        await self.close()
