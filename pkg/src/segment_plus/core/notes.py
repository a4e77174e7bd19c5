"""Config validation and note serialization shared by every stage."""

import json
import logging
from typing import Any, Dict, List, Optional

from segment_plus.models import Note, NoteKind, PipelineConfig
from segment_plus.tokenwork import TokenCounter, default_counter
from segment_plus.utils import ConfigInvalid, NoteParseFailure

logger = logging.getLogger(__name__)

MIN_SEGMENT_SIZE = 100
MIN_MERGE_BATCH_TOKENS = 256


def validate_config(config: PipelineConfig) -> PipelineConfig:
    """Check every PipelineConfig constraint in a fixed order.

    Args:
        config: Configuration to check.

    Returns:
        The same config, unchanged.

    Raises:
        ConfigInvalid: Naming the first violated field.
    """
    checks = [
        ("segment_size", config.segment_size >= MIN_SEGMENT_SIZE,
         f"segment_size must be >= {MIN_SEGMENT_SIZE}"),
        ("max_merge_batch_tokens", config.max_merge_batch_tokens >= MIN_MERGE_BATCH_TOKENS,
         f"max_merge_batch_tokens must be >= {MIN_MERGE_BATCH_TOKENS}"),
        ("prompt_overhead_reserve", config.prompt_overhead_reserve >= 0,
         "prompt_overhead_reserve must be >= 0"),
        ("final_context_limit", config.final_context_limit > config.prompt_overhead_reserve,
         "final_context_limit must exceed prompt_overhead_reserve"),
        ("max_iterations", config.max_iterations >= 1, "max_iterations must be >= 1"),
        ("parallelism", config.parallelism >= 1, "parallelism must be >= 1"),
        ("temperature", config.temperature >= 0, "temperature must be >= 0"),
        ("max_output_tokens", config.max_output_tokens >= 1, "max_output_tokens must be >= 1"),
    ]
    for field, ok, message in checks:
        if not ok:
            raise ConfigInvalid(field, message)
    return config


def serialize_note(note: Note) -> str:
    """Render a note as the JSON object shown to the model.

    Only Evidence and Reasoning are emitted; label, span and generation are
    bookkeeping and never appear in prompts.
    """
    return json.dumps(
        {"Evidence": note.evidence, "Reasoning": note.reasoning}, ensure_ascii=False
    )


def render_note(note: Note) -> str:
    """Prompt text for a note: JSON when structured, raw text otherwise."""
    if note.kind == NoteKind.FREE_TEXT:
        return note.reasoning
    return serialize_note(note)


def note_tokens(note: Note, counter: Optional[TokenCounter] = None) -> int:
    """Token size of a note as it appears in prompts."""
    return (counter or default_counter()).count(render_note(note))


def _as_text(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, list):
        return "\n".join(_as_text(v) for v in value)
    return json.dumps(value, ensure_ascii=False) if isinstance(value, dict) else str(value)


def _candidates(raw: str) -> List[Dict[str, Any]]:
    found: List[Dict[str, Any]] = []
    first, last = raw.find("{"), raw.rfind("}")
    if first != -1 and last > first:
        try:
            value = json.loads(raw[first : last + 1])
            if isinstance(value, dict):
                found.append(value)
                return found
        except (ValueError, RecursionError):
            pass
    decoder = json.JSONDecoder()
    pos = raw.find("{")
    while pos != -1:
        try:
            value, _ = decoder.raw_decode(raw, pos)
        except (ValueError, RecursionError):
            value = None
        if isinstance(value, dict):
            found.append(value)
            break
        pos = raw.find("{", pos + 1)
    return found


def parse_note(raw: str) -> Note:
    """Extract a note from a model response.

    The outermost brace-delimited object is tried first, then the first
    object that decodes. Keys match case-insensitively, missing keys default
    to empty strings and extra keys are ignored.

    Args:
        raw: Backend response text.

    Returns:
        A generation-0, unlabeled note.

    Raises:
        NoteParseFailure: If no JSON object can be decoded.
    """
    candidates = _candidates(raw)
    if not candidates:
        raise NoteParseFailure(f"No JSON object in response: {raw[:80]!r}")
    fields = {str(k).strip().lower(): v for k, v in candidates[0].items()}
    return Note(
        evidence=_as_text(fields.get("evidence")),
        reasoning=_as_text(fields.get("reasoning")),
    )
