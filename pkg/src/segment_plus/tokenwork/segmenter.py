"""Document segmentation into disjoint, token-bounded segments."""

import logging
import re
from typing import List, Optional

from segment_plus.models import PipelineConfig, Segment
from segment_plus.utils import EmptyDocument

from .counters import TokenCounter, default_counter

logger = logging.getLogger(__name__)

# Fraction of segment_size searched backwards for a natural boundary
LOOKBACK_FRACTION = 0.10

_SENTENCE_END = re.compile(r"[.!?][\"')\]]*\s+")


def _max_fitting_end(doc: str, start: int, size: int, counter: TokenCounter, cpt: float) -> int:
    """Largest end such that doc[start:end] has at most ``size`` tokens."""
    n = len(doc)
    guess = min(n, start + max(1, int(size * cpt)))
    if counter.count(doc[start:guess]) <= size:
        lo = guess
        if lo == n:
            return n
        step = max(1, int(size * cpt * 0.1))
        while True:
            reach = min(n, lo + step)
            if counter.count(doc[start:reach]) <= size:
                lo = reach
                if lo == n:
                    return n
                step *= 2
            else:
                hi = reach
                break
    else:
        lo, hi = start, guess
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if counter.count(doc[start:mid]) <= size:
            lo = mid
        else:
            hi = mid
    return max(lo, start + 1)


def _boundary_cut(doc: str, start: int, end: int) -> int:
    """Pick a split point in the lookback window ending at ``end``.

    Preference: paragraph break, sentence end, whitespace, hard cut.
    """
    window_start = max(start + 1, end - int((end - start) * LOOKBACK_FRACTION))
    window = doc[window_start:end]

    para = window.rfind("\n\n")
    if para != -1:
        return window_start + para + 2

    last_sentence: Optional[re.Match[str]] = None
    for match in _SENTENCE_END.finditer(window):
        last_sentence = match
    if last_sentence is not None:
        return window_start + last_sentence.end()

    for i in range(len(window) - 1, -1, -1):
        if window[i].isspace():
            return window_start + i + 1

    return end


def segment_text(
    doc: str,
    config: PipelineConfig,
    counter: Optional[TokenCounter] = None,
) -> List[Segment]:
    """Split a document into ordered segments of at most ``segment_size`` tokens.

    Segments partition the document exactly: joining their texts in index
    order reproduces ``doc`` byte for byte.

    Args:
        doc: Source document.
        config: Pipeline configuration (uses ``segment_size``).
        counter: Token counter; defaults to the built-in counter.

    Returns:
        Segments in document order.

    Raises:
        EmptyDocument: If ``doc`` is empty or whitespace only.
    """
    if not doc.strip():
        raise EmptyDocument("Document is empty")
    counter = counter or default_counter()
    size = config.segment_size

    total = counter.count(doc)
    cpt = max(len(doc) / max(total, 1), 1.0)

    segments: List[Segment] = []
    start = 0
    n = len(doc)
    while start < n:
        end = _max_fitting_end(doc, start, size, counter, cpt)
        cut = n if end >= n else _boundary_cut(doc, start, end)
        text = doc[start:cut]
        segments.append(
            Segment(index=len(segments), text=text, token_count=counter.count(text))
        )
        start = cut

    logger.debug(
        f"Segmented {total} tokens into {len(segments)} segments (size {size})"
    )
    return segments
