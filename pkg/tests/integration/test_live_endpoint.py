"""Smoke test against a real OpenAI-compatible endpoint.

Runs only when ``SEGPLUS_API_KEY`` is set; ``SEGPLUS_MODEL`` picks the model.
"""

import os

import pytest

from segment_plus.backend import HttpBackend
from segment_plus.config import API_KEY_ENV
from segment_plus.models import PipelineConfig, TraceEventKind
from segment_plus.pipeline import run_pipeline

pytestmark = [
    pytest.mark.live,
    pytest.mark.skipif(not os.environ.get(API_KEY_ENV), reason=f"{API_KEY_ENV} not set"),
]


async def test_single_fact_answer(make_task, templates, counter):
    """Test one 4k task returns an answer and a complete trace."""
    task, doc = make_task("single_fact", 4096)
    config = PipelineConfig(model=os.environ.get("SEGPLUS_MODEL", "gpt-3.5-turbo"), parallelism=4)
    async with HttpBackend(model=config.model) as backend:
        result = await run_pipeline(task.question, doc, config, backend, templates, counter)

    assert result.answer
    assert result.trace.events[0].event == TraceEventKind.SEGMENTS
    assert result.trace.events[-1].event == TraceEventKind.ANSWER
    assert result.trace.stats.backend_calls >= result.trace.stats.n_segments + 1
