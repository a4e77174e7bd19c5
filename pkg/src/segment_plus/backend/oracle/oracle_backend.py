"""Scripted oracle backend for offline, verifiable pipeline runs."""

import logging
from typing import Dict, List, Optional

from segment_plus.core import parse_note, serialize_note
from segment_plus.models import (
    BackendRequest,
    BackendResponse,
    Note,
    OracleRegistry,
    Stage,
    Usage,
)
from segment_plus.pipeline.templates import PromptTemplates, default_templates
from segment_plus.tokenwork import TokenCounter, default_counter
from segment_plus.utils import NoteParseFailure

from ..abstract import AbstractBackend

logger = logging.getLogger(__name__)

NO_INFORMATION = "no relevant information"
FOUND_REASONING = "Relevant fact found."
UNKNOWN_ANSWER = "unknown"


def oracle_answer_rule(
    request: BackendRequest,
    registry: OracleRegistry,
    templates: Optional[PromptTemplates] = None,
) -> str:
    """Answer only when every required fact is present in the context.

    Args:
        request: An answer-stage request.
        registry: Known facts and gold answer.
        templates: Templates used to locate the context block.

    Returns:
        The gold answer, or ``"unknown"``.
    """
    slots = (templates or default_templates()).answer.parse(request.prompt)
    context = slots["context"] if slots is not None else request.prompt
    if context and all(s in context for s in registry.required_sentences):
        return registry.gold_answer
    return UNKNOWN_ANSWER


class OracleBackend(AbstractBackend):
    """Deterministic stand-in for a language model over known facts.

    The oracle acts as a perfect extractor: a fact counts as seen only when
    its sentence appears verbatim in the relevant prompt block. It is pure,
    so identical requests always yield identical responses. Useful for:
    - End-to-end tests without paid API calls
    - Checking call counts, ordering and filtering through the trace
    - Demonstrating the pipeline offline
    """

    def __init__(
        self,
        registry: OracleRegistry,
        templates: Optional[PromptTemplates] = None,
        counter: Optional[TokenCounter] = None,
    ):
        """Initialize the oracle.

        Args:
            registry: Facts the oracle recognises and the answer they imply.
            templates: Templates used to locate prompt blocks.
            counter: Counter used for reported usage.
        """
        self.registry = registry
        self._templates = templates or default_templates()
        self._counter = counter or default_counter()

    @property
    def is_oracle(self) -> bool:
        """Check if this is a scripted oracle backend."""
        return True

    def _facts_in(self, text: str) -> List[str]:
        return [s for s in self.registry.fact_sentences if s in text]

    def _gather(self, prompt: str) -> str:
        slots = self._templates.gather.parse(prompt)
        if slots is not None:
            return self._structured_gather(slots["segment"])
        slots = self._templates.gather_free.parse(prompt)
        if slots is not None:
            facts = self._facts_in(slots["segment"])
            return "\n".join(facts) if facts else NO_INFORMATION
        return self._structured_gather(prompt)

    def _structured_gather(self, segment: str) -> str:
        facts = self._facts_in(segment)
        if not facts:
            return serialize_note(Note(evidence="", reasoning=NO_INFORMATION))
        return serialize_note(Note(evidence="\n".join(facts), reasoning=FOUND_REASONING))

    def _filter(self, prompt: str) -> str:
        slots = self._templates.filter.parse(prompt)
        if slots is not None:
            try:
                note = parse_note(slots["note_json"])
            except NoteParseFailure:
                return "Remove"
            return "Keep" if note.evidence.strip() else "Remove"
        slots = self._templates.filter_free.parse(prompt)
        text = slots["answer"] if slots is not None else prompt
        return "Keep" if self._facts_in(text) else "Remove"

    def _merge(self, prompt: str) -> str:
        slots = self._templates.merge.parse(prompt)
        if slots is not None:
            notes: List[Note] = []
            for line in slots["notes"].split("\n"):
                try:
                    notes.append(parse_note(line))
                except NoteParseFailure:
                    continue
            merged = Note(
                evidence="\n".join(n.evidence for n in notes),
                reasoning=f"Merged {len(notes)} notes.",
            )
            return serialize_note(merged)
        slots = self._templates.merge_free.parse(prompt)
        facts = self._facts_in(slots["notes"] if slots is not None else prompt)
        return "\n".join(facts) if facts else NO_INFORMATION

    def _judge(self, prompt: str) -> str:
        from segment_plus.evalkit.metrics import normalize_answer

        for template, choice in (
            (self._templates.judge, False),
            (self._templates.judge_choice, True),
        ):
            slots = template.parse(prompt)
            if slots is None:
                continue
            same = normalize_answer(slots["prediction"]) == normalize_answer(slots["answer"])
            if choice:
                return "true" if same else "false"
            return f"Score = {100 if same else 0}"
        return "Score = 0"

    async def complete(self, request: BackendRequest) -> BackendResponse:
        """Answer a request by the scripted rule for its stage."""
        if request.stage == Stage.GATHER:
            text = self._gather(request.prompt)
        elif request.stage == Stage.FILTER:
            text = self._filter(request.prompt)
        elif request.stage == Stage.MERGE:
            text = self._merge(request.prompt)
        elif request.stage == Stage.ANSWER:
            text = oracle_answer_rule(request, self.registry, self._templates)
        else:
            text = self._judge(request.prompt)

        logger.debug(f"Oracle {request.stage.value}: {text[:60]!r}")
        return BackendResponse(
            text=text,
            usage=Usage(
                prompt_tokens=self._counter.count(request.prompt),
                completion_tokens=self._counter.count(text),
            ),
            attempts=1,
        )


class ScriptedBackend(AbstractBackend):
    """Backend returning canned responses per stage, for fault-path tests.

    Each stage has a queue of responses; the last one repeats once the
    queue is drained. An Exception instance in the queue is raised instead.
    """

    def __init__(self, responses: Dict[Stage, List[object]]):
        """Initialize with per-stage response queues."""
        self._responses = {stage: list(items) for stage, items in responses.items()}
        self.requests: List[BackendRequest] = []

    @property
    def is_oracle(self) -> bool:
        """Check if this is a scripted oracle backend."""
        return True

    async def complete(self, request: BackendRequest) -> BackendResponse:
        """Pop the next canned response for the request's stage."""
        self.requests.append(request)
        queue = self._responses.get(request.stage) or [""]
        item = queue.pop(0) if len(queue) > 1 else queue[0]
        if isinstance(item, Exception):
            raise item
        return BackendResponse(text=str(item))
