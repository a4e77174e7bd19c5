"""Stage functions of the pipeline.

Stage 1 gathers one note per segment and labels it Keep or Remove. Stage 2
packs surviving notes into order-preserving batches under a token budget and
merges each batch, repeating until one note fits the final context. Stage 3
answers from that note alone, never from the original segments.
"""

import logging
import re
from typing import Callable, List, Optional, Sequence, Tuple

from segment_plus.backend.abstract import AbstractBackend
from segment_plus.core import note_tokens, parse_note, render_note, serialize_note
from segment_plus.models import (
    BackendRequest,
    EvidenceMerge,
    GenerationParams,
    Note,
    NoteKind,
    NoteLabel,
    PipelineConfig,
    Segment,
    Stage,
    TraceEventKind,
)
from segment_plus.tokenwork import TokenCounter, default_counter, truncate_to_tokens
from segment_plus.utils import NoteParseFailure

from .templates import PromptTemplates
from .trace import CallScheduler, TraceRecorder

logger = logging.getLogger(__name__)

DEGRADED_REASONING_TOKENS = 200

NO_INFORMATION_PATTERN = re.compile(
    r"no relevant information|no information|not mentioned", re.IGNORECASE
)
REMOVE_PATTERN = re.compile(r"\bremove\b", re.IGNORECASE)


async def gather_note(
    question: str,
    segment: Segment,
    backend: AbstractBackend,
    templates: PromptTemplates,
    *,
    structured: bool = True,
    params: Optional[GenerationParams] = None,
    counter: Optional[TokenCounter] = None,
) -> Note:
    """Collect a note for one segment.

    Args:
        question: Question being answered.
        segment: Segment to read.
        backend: Language-model backend.
        templates: Prompt templates.
        structured: Ask for an Evidence/Reasoning note; otherwise a free-text answer.
        params: Sampling parameters.
        counter: Counter for truncating a degraded note.

    Returns:
        Generation-0 note covering ``segment.index``. An unparseable response
        is retried once, then kept as reasoning with empty evidence.

    Raises:
        BackendError: Propagated from the backend.
    """
    params = params or GenerationParams()
    span = (segment.index, segment.index)

    if not structured:
        prompt = templates.gather_free.render(segment=segment.text, question=question)
        response = await backend.complete(
            BackendRequest(stage=Stage.GATHER, prompt=prompt, params=params)
        )
        return Note(reasoning=response.text.strip(), span=span, kind=NoteKind.FREE_TEXT)

    prompt = templates.gather.render(segment=segment.text, question=question)
    raw = ""
    for attempt in (1, 2):
        response = await backend.complete(
            BackendRequest(stage=Stage.GATHER, prompt=prompt, params=params)
        )
        raw = response.text
        try:
            note = parse_note(raw)
        except NoteParseFailure:
            logger.warning(f"Segment {segment.index}: unparseable note (attempt {attempt})")
            continue
        return note.model_copy(update={"span": span})

    return Note(
        evidence="",
        reasoning=truncate_to_tokens(
            raw.strip(), DEGRADED_REASONING_TOKENS, counter or default_counter()
        ),
        span=span,
    )


def prefilter_note(note: Note) -> Note:
    """Remove notes that plainly carry nothing, without a backend call.

    A structured note is removed when its evidence is blank or its reasoning
    states there is no information; a free-text note when its text is blank
    or states the same. Other notes are returned unchanged.
    """
    if note.kind == NoteKind.FREE_TEXT:
        empty = not note.reasoning.strip()
    else:
        empty = not note.evidence.strip()
    if empty or NO_INFORMATION_PATTERN.search(note.reasoning):
        return note.model_copy(update={"label": NoteLabel.REMOVE})
    return note


async def filter_note(
    question: str,
    note: Note,
    backend: AbstractBackend,
    templates: PromptTemplates,
    *,
    params: Optional[GenerationParams] = None,
) -> Note:
    """Label a note Keep or Remove by asking the model.

    Any response containing the word "remove" labels the note Remove;
    everything else, including unclear answers, keeps it.
    """
    if note.kind == NoteKind.FREE_TEXT:
        prompt = templates.filter_free.render(question=question, answer=note.reasoning)
    else:
        prompt = templates.filter.render(question=question, note_json=serialize_note(note))
    response = await backend.complete(
        BackendRequest(stage=Stage.FILTER, prompt=prompt, params=params or GenerationParams())
    )
    label = NoteLabel.REMOVE if REMOVE_PATTERN.search(response.text) else NoteLabel.KEEP
    return note.model_copy(update={"label": label})


def pack_sizes(sizes: Sequence[int], max_tokens: int) -> List[List[int]]:
    """Greedy left-to-right packing of item sizes into index batches.

    An item joins the open batch while the running total stays within
    ``max_tokens``; a batch that reaches the budget is closed. An item larger
    than the budget forms a batch of its own.
    """
    batches: List[List[int]] = []
    current: List[int] = []
    total = 0
    for i, size in enumerate(sizes):
        if current and total + size > max_tokens:
            batches.append(current)
            current, total = [], 0
        current.append(i)
        total += size
        if total >= max_tokens:
            batches.append(current)
            current, total = [], 0
    if current:
        batches.append(current)
    return batches


def batch_notes(
    notes: Sequence[Note],
    max_tokens: int,
    counter: Optional[TokenCounter] = None,
) -> List[List[Note]]:
    """Split ordered notes into merge batches by serialized token size."""
    sizes = [note_tokens(n, counter) for n in notes]
    return [[notes[i] for i in batch] for batch in pack_sizes(sizes, max_tokens)]


def _merged_span(batch: Sequence[Note]) -> Tuple[int, int]:
    return (min(n.span[0] for n in batch), max(n.span[1] for n in batch))


async def merge_batch(
    question: str,
    batch: Sequence[Note],
    backend: AbstractBackend,
    templates: PromptTemplates,
    config: PipelineConfig,
) -> Note:
    """Merge a batch of notes into one note.

    Structured notes are merged by the model; under programmatic
    concatenation only the model's reasoning is used and the evidence is the
    in-order newline join of the inputs, which is also the fallback when the
    model's output does not parse. Free-text notes are always merged by the
    model.

    Args:
        question: Question being answered.
        batch: Non-empty, ordered notes.
        backend: Language-model backend.
        templates: Prompt templates.
        config: Pipeline configuration.

    Returns:
        Note spanning the union of the batch with generation one above the
        highest input generation.
    """
    if not batch:
        raise ValueError("Cannot merge an empty batch")
    params = GenerationParams(
        temperature=config.temperature, max_output_tokens=config.max_output_tokens
    )
    shared = {
        "span": _merged_span(batch),
        "generation": 1 + max(n.generation for n in batch),
        "label": batch[0].label,
        "kind": batch[0].kind,
    }

    if batch[0].kind == NoteKind.FREE_TEXT:
        prompt = templates.merge_free.render(
            notes="\n\n".join(n.reasoning for n in batch), question=question
        )
        response = await backend.complete(
            BackendRequest(stage=Stage.MERGE, prompt=prompt, params=params)
        )
        text = response.text.strip() or "\n".join(n.reasoning for n in batch)
        return Note(reasoning=text, **shared)

    prompt = templates.merge.render(
        notes="\n".join(serialize_note(n) for n in batch), question=question
    )
    response = await backend.complete(
        BackendRequest(stage=Stage.MERGE, prompt=prompt, params=params)
    )
    joined = "\n".join(n.evidence for n in batch)
    try:
        merged = parse_note(response.text)
    except NoteParseFailure:
        logger.warning(f"Merge output for span {shared['span']} unparseable; concatenating")
        return Note(evidence=joined, reasoning="\n".join(n.reasoning for n in batch), **shared)

    if config.evidence_merge == EvidenceMerge.PROGRAMMATIC_CONCAT:
        return Note(evidence=joined, reasoning=merged.reasoning, **shared)
    return Note(evidence=merged.evidence, reasoning=merged.reasoning, **shared)


def _longest_fitting_prefix(text: str, fits: Callable[[str], bool]) -> str:
    if fits(text):
        return text
    lo, hi = 0, len(text)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fits(text[:mid]):
            lo = mid
        else:
            hi = mid
    return text[:lo]


def combine_notes(notes: Sequence[Note]) -> Note:
    """Concatenate ordered notes without a model call."""
    if len(notes) == 1:
        return notes[0]
    return Note(
        evidence="\n".join(n.evidence for n in notes),
        reasoning="\n".join(n.reasoning for n in notes if n.reasoning),
        span=_merged_span(notes),
        generation=1 + max(n.generation for n in notes),
        label=notes[0].label,
        kind=notes[0].kind,
    )


def truncate_note(notes: Sequence[Note], budget: int, counter: TokenCounter) -> Note:
    """Combine notes and cut evidence from the tail until they fit ``budget``.

    Reasoning is cut as well only when it alone exceeds the budget.
    """
    note = combine_notes(notes)

    if note.kind == NoteKind.FREE_TEXT:
        return note.model_copy(
            update={"reasoning": truncate_to_tokens(note.reasoning, budget, counter)}
        )

    def with_evidence(evidence: str) -> bool:
        return note_tokens(note.model_copy(update={"evidence": evidence}), counter) <= budget

    evidence = _longest_fitting_prefix(note.evidence, with_evidence)
    note = note.model_copy(update={"evidence": evidence})
    if note_tokens(note, counter) > budget:
        bare = note.model_copy(update={"evidence": ""})

        def with_reasoning(reasoning: str) -> bool:
            return note_tokens(bare.model_copy(update={"reasoning": reasoning}), counter) <= budget

        note = bare.model_copy(
            update={"reasoning": _longest_fitting_prefix(note.reasoning, with_reasoning)}
        )
    return note


async def reduce_notes(
    question: str,
    notes: Sequence[Note],
    backend: AbstractBackend,
    templates: PromptTemplates,
    config: PipelineConfig,
    counter: Optional[TokenCounter] = None,
    *,
    trace: Optional[TraceRecorder] = None,
) -> Note:
    """Merge notes in batches, iterating until one note fits the final budget.

    Each iteration packs the current notes into batches of at most
    ``max_merge_batch_tokens`` and merges the batches concurrently. Once the
    notes fit the final budget together, one last merge covers all of them.
    When the iteration cap is reached, or an iteration shrinks neither the
    note count nor the token total, the remaining notes are concatenated and
    cut to the budget; the trace is flagged only if something was cut.

    Args:
        question: Question being answered.
        notes: Non-empty notes in ascending span order.
        backend: Language-model backend.
        templates: Prompt templates.
        config: Pipeline configuration.
        counter: Token counter.
        trace: Recorder receiving batch, merge and iteration events.

    Returns:
        The single final note.
    """
    if not notes:
        raise ValueError("reduce_notes needs at least one note")
    counter = counter or default_counter()
    recorder = trace or TraceRecorder()
    scheduler = CallScheduler(backend, config.parallelism, recorder)
    budget = config.final_note_budget

    current = list(notes)
    iteration = 0
    while True:
        sizes = [note_tokens(n, counter) for n in current]
        total = sum(sizes)
        if len(current) == 1 and total <= budget:
            return current[0]
        if iteration >= config.max_iterations:
            reason = "max_iterations"
            break

        iteration += 1
        # Everything already fits the answer prompt: one merge of all notes.
        final_merge = total <= budget
        if final_merge:
            batches = [current]
        else:
            batches = [
                [current[i] for i in b] for b in pack_sizes(sizes, config.max_merge_batch_tokens)
            ]
        recorder.add(
            TraceEventKind.BATCHES,
            stage=Stage.MERGE,
            iteration=iteration,
            spans=[[list(n.span) for n in b] for b in batches],
            tokens=[sum(note_tokens(n, counter) for n in b) for b in batches],
            final=final_merge,
        )

        async def _merge(batch: List[Note], b: AbstractBackend) -> Note:
            return await merge_batch(question, batch, b, templates, config)

        merged = await scheduler.map(batches, _merge, iteration=iteration)
        for note in merged:
            recorder.add(
                TraceEventKind.MERGE,
                stage=Stage.MERGE,
                iteration=iteration,
                span=list(note.span),
                generation=note.generation,
                evidence=note.evidence,
                reasoning=note.reasoning,
            )
        new_total = sum(note_tokens(n, counter) for n in merged)
        recorder.iterations = iteration
        recorder.add(
            TraceEventKind.ITERATION,
            stage=Stage.MERGE,
            iteration=iteration,
            notes_in=len(current),
            notes_out=len(merged),
            tokens_in=total,
            tokens_out=new_total,
        )
        stalled = len(merged) >= len(current) and new_total >= total
        current = merged
        if stalled:
            if len(current) == 1 and new_total <= budget:
                return current[0]
            reason = "stalled"
            break

    combined = combine_notes(current)
    final = truncate_note([combined], budget, counter)
    if final.evidence == combined.evidence and final.reasoning == combined.reasoning:
        logger.info(f"Combining {len(current)} notes without a final merge ({reason})")
        return final

    logger.warning(f"Truncating final note to {budget} tokens ({reason})")
    recorder.truncated = True
    recorder.add(
        TraceEventKind.TRUNCATION,
        stage=Stage.MERGE,
        iteration=iteration,
        reason=reason,
        notes=len(current),
        tokens_before=sum(note_tokens(n, counter) for n in current),
        tokens_after=note_tokens(final, counter),
    )
    return final


async def answer_question(
    question: str,
    final_note: Note,
    backend: AbstractBackend,
    templates: PromptTemplates,
    task_kind: Optional[str] = None,
    *,
    params: Optional[GenerationParams] = None,
) -> str:
    """Answer from the final note only.

    Args:
        question: Question being answered.
        final_note: Merged note used as the whole context.
        backend: Language-model backend.
        templates: Prompt templates.
        task_kind: Selects an ``answer_<task_kind>`` template when one is loaded.
        params: Sampling parameters.

    Returns:
        Trimmed model answer.
    """
    template = templates.answer_for(task_kind)
    prompt = template.render(context=render_note(final_note), question=question)
    response = await backend.complete(
        BackendRequest(stage=Stage.ANSWER, prompt=prompt, params=params or GenerationParams())
    )
    return response.text.strip()
