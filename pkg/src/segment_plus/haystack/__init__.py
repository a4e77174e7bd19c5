"""Synthetic needle-in-a-haystack tasks for offline evaluation."""

from .noise import generate_noise, split_sentences, split_with_breaks, load_noise
from .generator import (
    KIND_CODES,
    uniform_depths,
    make_task_suite,
    make_grid,
    build_haystack,
    noise_seed,
    write_suite,
    load_suite,
)

__all__ = [
    "generate_noise",
    "split_sentences",
    "split_with_breaks",
    "load_noise",
    "KIND_CODES",
    "uniform_depths",
    "make_task_suite",
    "make_grid",
    "build_haystack",
    "noise_seed",
    "write_suite",
    "load_suite",
]
