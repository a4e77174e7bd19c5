"""Pytest configuration and fixtures."""

import pytest

from segment_plus.backend import OracleBackend
from segment_plus.haystack import build_haystack, generate_noise, make_task_suite, noise_seed
from segment_plus.models import HaystackTask, OracleRegistry, PipelineConfig, TaskKind
from segment_plus.pipeline import default_templates
from segment_plus.tokenwork import WordPieceCounter


@pytest.fixture
def counter():
    """Provide the built-in token counter.

    Returns:
        WordPieceCounter: Offline counter.
    """
    return WordPieceCounter()


@pytest.fixture
def templates():
    """Provide the shipped prompt templates."""
    return default_templates()


@pytest.fixture
def config():
    """Provide a default pipeline configuration."""
    return PipelineConfig()


@pytest.fixture
def registry():
    """Provide a single-fact oracle registry.

    Returns:
        OracleRegistry: Registry for "Where is Mary?".
    """
    return OracleRegistry(
        fact_sentences=["Mary moved to the bathroom."],
        gold_answer="bathroom",
        required_facts=[0],
    )


@pytest.fixture
async def oracle_backend(registry, templates, counter):
    """Provide an oracle backend over the single-fact registry.

    Yields:
        OracleBackend: Scripted backend.
    """
    backend = OracleBackend(registry, templates, counter)
    yield backend
    await backend.aclose()


@pytest.fixture
def make_task(counter):
    """Build a haystack task and its document.

    Returns:
        Callable returning ``(task, document)`` for a kind and length.
    """

    def _make(kind: TaskKind = TaskKind.SINGLE_FACT, target_tokens: int = 4096, seed: int = 7):
        kind = TaskKind(kind)
        task: HaystackTask = make_task_suite(kind, 1, seed, target_tokens=target_tokens)[0]
        noise = generate_noise(target_tokens, noise_seed(task), counter)
        return task, build_haystack(task, noise, counter)

    return _make
