"""Config validation and note serialization."""

from .notes import (
    validate_config,
    serialize_note,
    render_note,
    note_tokens,
    parse_note,
)

__all__ = [
    "validate_config",
    "serialize_note",
    "render_note",
    "note_tokens",
    "parse_note",
]
