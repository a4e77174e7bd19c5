"""The Segment+ pipeline: gather and filter notes, merge them, answer."""

from .templates import (
    TEMPLATE_SLOTS,
    PromptTemplate,
    PromptTemplates,
    load_templates,
    default_templates,
)
from .trace import RecordingBackend, TraceRecorder, CallScheduler
from .stages import (
    gather_note,
    prefilter_note,
    filter_note,
    pack_sizes,
    batch_notes,
    merge_batch,
    combine_notes,
    truncate_note,
    reduce_notes,
    answer_question,
)
from .runner import run_pipeline, SegmentPlusPipeline

__all__ = [
    "TEMPLATE_SLOTS",
    "PromptTemplate",
    "PromptTemplates",
    "load_templates",
    "default_templates",
    "RecordingBackend",
    "TraceRecorder",
    "CallScheduler",
    "gather_note",
    "prefilter_note",
    "filter_note",
    "pack_sizes",
    "batch_notes",
    "merge_batch",
    "combine_notes",
    "truncate_note",
    "reduce_notes",
    "answer_question",
    "run_pipeline",
    "SegmentPlusPipeline",
]
