"""Token counting and document segmentation."""

from .counters import (
    TokenCounter,
    WordPieceCounter,
    TiktokenCounter,
    default_counter,
    get_counter,
    count_tokens,
    truncate_to_tokens,
)
from .segmenter import segment_text

__all__ = [
    "TokenCounter",
    "WordPieceCounter",
    "TiktokenCounter",
    "default_counter",
    "get_counter",
    "count_tokens",
    "truncate_to_tokens",
    "segment_text",
]
