"""Trace recording and bounded, order-stable fan-out of backend calls."""

import asyncio
import logging
from typing import Any, Awaitable, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

from segment_plus.backend.abstract import AbstractBackend
from segment_plus.models import (
    BackendRequest,
    BackendResponse,
    PipelineTrace,
    Stage,
    TraceEvent,
    TraceEventKind,
    TraceStats,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class RecordingBackend(AbstractBackend):
    """Wraps a backend for one work item, capturing its exchanges.

    All wrappers of a phase share one semaphore, which bounds the number of
    in-flight calls to the underlying backend.
    """

    def __init__(self, inner: AbstractBackend, semaphore: asyncio.Semaphore):
        """Initialize the wrapper.

        Args:
            inner: Backend that actually serves requests.
            semaphore: Shared in-flight call limit.
        """
        self._inner = inner
        self._semaphore = semaphore
        self.exchanges: List[Tuple[BackendRequest, BackendResponse]] = []

    @property
    def is_oracle(self) -> bool:
        """Check if the wrapped backend is a scripted oracle."""
        return self._inner.is_oracle

    async def complete(self, request: BackendRequest) -> BackendResponse:
        """Forward the request under the shared limit and record it."""
        async with self._semaphore:
            response = await self._inner.complete(request)
        self.exchanges.append((request, response))
        return response


class TraceRecorder:
    """Accumulates trace events in a deterministic order."""

    def __init__(self) -> None:
        """Initialize an empty trace."""
        self._events: List[TraceEvent] = []
        self._calls_by_stage: Dict[str, int] = {}
        self._prompt_tokens = 0
        self._completion_tokens = 0
        self.n_segments = 0
        self.n_notes = 0
        self.n_kept = 0
        self.iterations = 0
        self.truncated = False

    def add(
        self,
        event_kind: TraceEventKind,
        /,
        stage: Optional[Stage] = None,
        iteration: Optional[int] = None,
        **data: Any,
    ) -> None:
        """Append one event.

        ``event_kind`` is positional-only so payloads may carry their own ``kind`` key.
        """
        self._events.append(
            TraceEvent(
                seq=len(self._events),
                event=event_kind,
                stage=stage,
                iteration=iteration,
                data=data,
            )
        )

    def add_calls(self, recording: RecordingBackend, iteration: Optional[int] = None) -> None:
        """Append the exchanges captured by one wrapper, in call order."""
        for request, response in recording.exchanges:
            stage = request.stage.value
            self._calls_by_stage[stage] = self._calls_by_stage.get(stage, 0) + 1
            self._prompt_tokens += response.usage.prompt_tokens
            self._completion_tokens += response.usage.completion_tokens
            self.add(
                TraceEventKind.CALL,
                stage=request.stage,
                iteration=iteration,
                prompt=request.prompt,
                response=response.text,
                attempts=response.attempts,
                prompt_tokens=response.usage.prompt_tokens,
                completion_tokens=response.usage.completion_tokens,
            )
        recording.exchanges.clear()

    def build(self) -> PipelineTrace:
        """Freeze the recorded events and counters into a trace."""
        stats = TraceStats(
            n_segments=self.n_segments,
            n_notes=self.n_notes,
            n_kept=self.n_kept,
            calls_by_stage=dict(sorted(self._calls_by_stage.items())),
            backend_calls=sum(self._calls_by_stage.values()),
            prompt_tokens=self._prompt_tokens,
            completion_tokens=self._completion_tokens,
            iterations=self.iterations,
            truncated=self.truncated,
        )
        return PipelineTrace(events=list(self._events), stats=stats)


class CallScheduler:
    """Runs one coroutine per item concurrently, bounded by ``parallelism``.

    Results come back in item order and each item's backend exchanges are
    appended to the trace in item order, so neither depends on completion
    order.
    """

    def __init__(self, backend: AbstractBackend, parallelism: int, recorder: TraceRecorder):
        """Initialize the scheduler.

        Args:
            backend: Backend shared by all items.
            parallelism: Max in-flight backend calls.
            recorder: Trace receiving the exchanges.
        """
        self._backend = backend
        self._semaphore = asyncio.Semaphore(parallelism)
        self.recorder = recorder

    async def map(
        self,
        items: Sequence[T],
        work: Callable[[T, AbstractBackend], Awaitable[R]],
        iteration: Optional[int] = None,
    ) -> List[R]:
        """Apply ``work`` to every item concurrently."""
        wrappers = [RecordingBackend(self._backend, self._semaphore) for _ in items]
        try:
            results = await asyncio.gather(
                *(work(item, wrapper) for item, wrapper in zip(items, wrappers))
            )
        finally:
            for wrapper in wrappers:
                self.recorder.add_calls(wrapper, iteration=iteration)
        return list(results)

    async def one(
        self,
        work: Callable[[AbstractBackend], Awaitable[R]],
        iteration: Optional[int] = None,
    ) -> R:
        """Run a single item through the scheduler."""
        wrapper = RecordingBackend(self._backend, self._semaphore)
        try:
            return await work(wrapper)
        finally:
            self.recorder.add_calls(wrapper, iteration=iteration)
