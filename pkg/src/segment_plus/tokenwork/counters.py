"""Token counters.

The built-in ``WordPieceCounter`` needs no tokenizer files, which keeps tests
and the oracle pipeline fully offline. ``TiktokenCounter`` plugs in a real
byte-pair encoding when the optional ``tiktoken`` extra is installed.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Optional

logger = logging.getLogger(__name__)

WORD_PIECE_CHARS = 6


class TokenCounter(ABC):
    """Deterministic text-to-token-count function.

    Implementations must be read-only after construction so a single counter
    can be shared by concurrent workers.
    """

    name: str = "abstract"

    @abstractmethod
    def count(self, text: str) -> int:
        """Count tokens in ``text``.

        Args:
            text: Any string, possibly empty.

        Returns:
            Non-negative token count; 0 for the empty string.
        """
        pass


class WordPieceCounter(TokenCounter):
    """Whitespace-delimited words, each split into 6-character pieces."""

    name = "wordpiece"

    def __init__(self, piece_chars: int = WORD_PIECE_CHARS):
        """Initialize the counter.

        Args:
            piece_chars: Max characters per piece.
        """
        if piece_chars < 1:
            raise ValueError("piece_chars must be positive")
        self._piece = piece_chars

    def count(self, text: str) -> int:
        """Count word pieces in ``text``."""
        piece = self._piece
        return sum((len(word) + piece - 1) // piece for word in text.split())


class TiktokenCounter(TokenCounter):
    """Byte-pair token counts from a tiktoken encoding."""

    def __init__(self, encoding_name: str = "cl100k_base"):
        """Load the encoding.

        Args:
            encoding_name: tiktoken encoding name.

        Raises:
            ImportError: If tiktoken is not installed.
        """
        import tiktoken

        self._encoding: Any = tiktoken.get_encoding(encoding_name)
        self.name = f"tiktoken:{encoding_name}"
        logger.info(f"Loaded tiktoken encoding {encoding_name}")

    def count(self, text: str) -> int:
        """Count byte-pair tokens in ``text``."""
        if not text:
            return 0
        return len(self._encoding.encode(text, disallowed_special=()))


_DEFAULT = WordPieceCounter()


def default_counter() -> TokenCounter:
    """Shared built-in counter instance."""
    return _DEFAULT


def get_counter(name: Optional[str] = None) -> TokenCounter:
    """Resolve a counter by name (``wordpiece`` or ``tiktoken[:encoding]``)."""
    if not name or name == WordPieceCounter.name:
        return _DEFAULT
    if name.startswith("tiktoken"):
        _, _, encoding = name.partition(":")
        return TiktokenCounter(encoding or "cl100k_base")
    raise ValueError(f"Unknown token counter: {name}")


def count_tokens(counter: TokenCounter, text: str) -> int:
    """Count tokens of ``text`` under ``counter``."""
    return counter.count(text)


def truncate_to_tokens(text: str, limit: int, counter: TokenCounter) -> str:
    """Return the longest prefix of ``text`` within ``limit`` tokens."""
    if limit <= 0:
        return ""
    if counter.count(text) <= limit:
        return text
    lo, hi = 0, len(text)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if counter.count(text[:mid]) <= limit:
            lo = mid
        else:
            hi = mid
    return text[:lo]
