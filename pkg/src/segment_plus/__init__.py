"""Segment+ long-input processing pipeline.

Lets a short-context language model answer questions over documents far
larger than its context window: segments are read in parallel into structured
Evidence/Reasoning notes, unhelpful notes are filtered out, and the rest are
merged batch by batch until a single note fits the final answering prompt.
"""

__version__ = "0.1.0"
__author__ = "Lucas"
__all__ = [
    "__version__",
    "__author__",
]
