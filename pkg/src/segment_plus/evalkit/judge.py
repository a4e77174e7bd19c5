"""Model-judged scoring of predictions against reference answers."""

import asyncio
import logging
import re
from typing import List, Optional, Sequence

from segment_plus.backend.abstract import AbstractBackend
from segment_plus.models import BackendRequest, EvalRecord, GenerationParams, Stage
from segment_plus.pipeline.templates import PromptTemplates, default_templates
from segment_plus.utils import BackendError, JudgeUnparsed

logger = logging.getLogger(__name__)

SCORE_PATTERN = re.compile(r"score\s*[=:]\s*(\d+(?:\.\d+)?)", re.IGNORECASE)
VERDICT_PATTERN = re.compile(r"\b(true|false)\b", re.IGNORECASE)
NUMBER_PATTERN = re.compile(r"(?<![\d.])(\d+(?:\.\d+)?)(?![\d.])")
CHOICE_LETTERS = "ABCD"


def parse_judge_score(text: str) -> float:
    """Extract a 0-100 score from judge output.

    ``Score = N`` wins; otherwise the last true/false verdict maps to 100/0;
    otherwise the first number in range is used.

    Raises:
        JudgeUnparsed: If the output holds no usable score.
    """
    match = SCORE_PATTERN.search(text)
    if match and 0.0 <= float(match.group(1)) <= 100.0:
        return float(match.group(1))
    verdicts = VERDICT_PATTERN.findall(text)
    if verdicts:
        return 100.0 if verdicts[-1].lower() == "true" else 0.0
    for number in NUMBER_PATTERN.findall(text):
        if 0.0 <= float(number) <= 100.0:
            return float(number)
    raise JudgeUnparsed(f"No score in judge output: {text[:80]!r}")


def format_choices(question: str, choices: Sequence[str]) -> str:
    """Append lettered options to a multiple-choice question."""
    lines = [question] + [f"({CHOICE_LETTERS[i]}) {c}" for i, c in enumerate(choices)]
    return "\n".join(lines)


async def judge_record(
    record: EvalRecord,
    backend: AbstractBackend,
    templates: PromptTemplates,
    params: Optional[GenerationParams] = None,
) -> EvalRecord:
    """Score one record with the judge prompt matching its task type."""
    if record.choices:
        prompt = templates.judge_choice.render(
            question=format_choices(record.question, record.choices),
            answer=record.gold,
            prediction=record.prediction,
        )
    else:
        prompt = templates.judge.render(
            question=record.question, answer=record.gold, prediction=record.prediction
        )
    response = await backend.complete(
        BackendRequest(stage=Stage.JUDGE, prompt=prompt, params=params or GenerationParams())
    )
    try:
        score = parse_judge_score(response.text)
    except JudgeUnparsed as e:
        logger.warning(f"Task {record.task_id}: {e}")
        return record.model_copy(update={"judge_score": None, "judge_unparsed": True})
    return record.model_copy(update={"judge_score": score, "judge_unparsed": False})


async def run_judge_eval(
    records: Sequence[EvalRecord],
    backend: AbstractBackend,
    templates: Optional[PromptTemplates] = None,
    parallelism: int = 8,
) -> List[EvalRecord]:
    """Attach judge scores to evaluation records.

    Failed records are passed through unscored. A backend error while judging
    one record flags that record as unparsed rather than aborting the run.

    Args:
        records: Records to score.
        backend: Judge backend.
        templates: Templates holding the judge prompts.
        parallelism: Max in-flight judge calls.

    Returns:
        Records in input order with ``judge_score`` or ``judge_unparsed`` set.
    """
    templates = templates or default_templates()
    semaphore = asyncio.Semaphore(parallelism)

    async def _one(record: EvalRecord) -> EvalRecord:
        if record.failed:
            return record
        async with semaphore:
            try:
                return await judge_record(record, backend, templates)
            except BackendError as e:
                logger.error(f"Judge call failed for {record.task_id}: {e}")
                return record.model_copy(update={"judge_unparsed": True})

    return list(await asyncio.gather(*(_one(r) for r in records)))
