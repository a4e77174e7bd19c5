"""Deterministic filler text for haystack documents.

The filler is grammatical but carries no people, objects or rooms, so it
never repeats or contradicts a needle fact.
"""

import logging
import random
import re
from pathlib import Path
from typing import List, Optional, Tuple, Union

from segment_plus.tokenwork import TokenCounter, default_counter

logger = logging.getLogger(__name__)

SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
SENTENCE_BREAK = re.compile(r"(?<=[.!?])(\s+)")

_OPENERS = [
    "In the early morning",
    "By late afternoon",
    "Throughout the long winter",
    "Over the following weeks",
    "During the harvest season",
    "After the spring floods",
    "Along the northern coast",
    "Across the high plateau",
    "Near the old harbour",
    "Beyond the eastern ridge",
]

_SUBJECTS = [
    "the river",
    "the mountain pass",
    "the grain market",
    "the night train",
    "the fishing fleet",
    "the coastal road",
    "the weather station",
    "the town council",
    "the village choir",
    "the copper mine",
    "the wool trade",
    "the lighthouse",
    "the ferry service",
    "the orchard cooperative",
]

_PREDICATES = [
    "rose slowly under a pale sky",
    "was quieter than in previous years",
    "drew travellers from distant provinces",
    "recorded steady winds from the west",
    "published its annual ledger of prices",
    "remained closed for repairs",
    "followed an old and familiar schedule",
    "changed little despite the cold",
    "attracted merchants with salt and timber",
    "kept careful notes on rainfall",
    "welcomed a modest crowd at dusk",
    "reported calm seas and clear visibility",
]

_CLOSERS = [
    "",
    "",
    " as it had for generations",
    " while clouds gathered to the south",
    " according to the regional almanac",
    " before the first frost arrived",
    " and few thought it remarkable",
]


def _sentence(rng: random.Random) -> str:
    subject = rng.choice(_SUBJECTS)
    return (
        f"{rng.choice(_OPENERS)}, {subject} {rng.choice(_PREDICATES)}"
        f"{rng.choice(_CLOSERS)}."
    )


def generate_noise(
    n_tokens: int,
    seed: Union[int, str],
    counter: Optional[TokenCounter] = None,
    paragraph_sentences: int = 8,
) -> str:
    """Generate filler text of at least ``n_tokens`` tokens.

    Args:
        n_tokens: Minimum token count of the result.
        seed: Seed for the sentence choices; equal seeds give equal text.
        counter: Token counter (built-in counter if omitted).
        paragraph_sentences: Sentences per paragraph.

    Returns:
        Paragraphs of filler sentences separated by blank lines.
    """
    counter = counter or default_counter()
    rng = random.Random(seed)
    paragraphs: List[str] = []
    current: List[str] = []
    total = 0
    while total < n_tokens:
        sentence = _sentence(rng)
        current.append(sentence)
        total += counter.count(sentence)
        if len(current) == paragraph_sentences:
            paragraphs.append(" ".join(current))
            current = []
    if current:
        paragraphs.append(" ".join(current))
    return "\n\n".join(paragraphs)


def split_sentences(text: str) -> List[str]:
    """Split text into sentences at terminal punctuation followed by whitespace."""
    return [s for s in (part.strip() for part in SENTENCE_SPLIT.split(text)) if s]


def split_with_breaks(text: str) -> List[Tuple[str, str]]:
    """Split text into ``(sentence, whitespace after it)`` pairs.

    Joining the pairs back together gives the stripped text, paragraph
    breaks included. The last sentence has an empty break.
    """
    parts = SENTENCE_BREAK.split(text.strip())
    breaks = parts[1::2] + [""]
    return [(s, b) for s, b in zip(parts[0::2], breaks) if s]


def load_noise(path: Path) -> str:
    """Read a user-supplied plain-text noise corpus."""
    text = Path(path).read_text(encoding="utf-8")
    logger.info(f"Loaded noise corpus {path} ({len(text)} chars)")
    return text
