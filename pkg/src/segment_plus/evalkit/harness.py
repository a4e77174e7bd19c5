"""Evaluation and sweep harnesses over question-answering tasks."""

import asyncio
import json
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from segment_plus.backend.abstract import AbstractBackend
from segment_plus.core import validate_config
from segment_plus.models import (
    CellSummary,
    EvalRecord,
    EvalReport,
    EvalSummary,
    EvalTask,
    HaystackTask,
    OracleRegistry,
    PipelineConfig,
    PipelineMode,
    SweepDimension,
    SweepReport,
    SweepRow,
    TraceSummary,
)
from segment_plus.pipeline import PromptTemplates, default_templates, run_pipeline
from segment_plus.tokenwork import TokenCounter, default_counter
from segment_plus.utils import EmptySweep, EmptyTaskSet, SegmentPlusError

from .metrics import Normalizer, exact_match, normalize_answer, token_f1

logger = logging.getLogger(__name__)

BackendFactory = Callable[[EvalTask], AbstractBackend]


def task_from_haystack(task: HaystackTask, document: str) -> EvalTask:
    """Evaluation task for a haystack item, cell keyed by haystack length."""
    return EvalTask(
        task_id=task.task_id,
        question=task.question,
        document=document,
        gold_answer=task.gold_answer,
        cell=str(task.target_tokens),
        registry=OracleRegistry.from_task(task),
    )


def load_eval_tasks(path: Path) -> List[EvalTask]:
    """Read tasks from a JSONL file.

    Haystack records (with ``facts``) become tasks with an oracle registry.
    Other records need ``task_id``, ``question``, ``gold_answer`` and either
    ``document`` or ``document_path``. Document paths are relative to the file.
    """
    path = Path(path)
    tasks: List[EvalTask] = []
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        record = json.loads(line)
        document = record.pop("document", None)
        document_path = record.get("document_path")
        if document is None and document_path:
            document = (path.parent / document_path).read_text(encoding="utf-8")
        if document is None:
            raise ValueError(f"{path}:{n}: record has no document")
        if "facts" in record:
            tasks.append(task_from_haystack(HaystackTask.model_validate(record), document))
        else:
            record.pop("document_path", None)
            tasks.append(EvalTask.model_validate({**record, "document": document}))
    logger.info(f"Loaded {len(tasks)} tasks from {path}")
    return tasks


def _cell_key(cell: str) -> Tuple[int, int, str]:
    return (0, int(cell), "") if cell.isdigit() else (1, 0, cell)


def summarize(records: Sequence[EvalRecord]) -> EvalSummary:
    """Per-cell and overall means; failed items score zero."""
    if not records:
        raise EmptyTaskSet("No records to summarize")

    def _mean(values: Sequence[float]) -> float:
        return sum(values) / len(values)

    by_cell: Dict[str, List[EvalRecord]] = {}
    for r in records:
        by_cell.setdefault(r.cell, []).append(r)
    cells = [
        CellSummary(
            cell=cell,
            n_items=len(rs),
            mean_em=_mean([r.em for r in rs]),
            mean_f1=_mean([r.f1 for r in rs]),
            failed=sum(r.failed for r in rs),
            backend_calls=sum(r.trace_stats.backend_calls for r in rs),
        )
        for cell, rs in sorted(by_cell.items(), key=lambda kv: _cell_key(kv[0]))
    ]
    judged = [r.judge_score for r in records if r.judge_score is not None]
    return EvalSummary(
        n_items=len(records),
        mean_em=_mean([r.em for r in records]),
        mean_f1=_mean([r.f1 for r in records]),
        mean_judge=_mean(judged) if judged else None,
        failed=sum(r.failed for r in records),
        backend_calls=sum(r.trace_stats.backend_calls for r in records),
        cells=cells,
    )


async def evaluate_task(
    task: EvalTask,
    config: PipelineConfig,
    backend: AbstractBackend,
    templates: PromptTemplates,
    counter: TokenCounter,
    normalizer: Normalizer = normalize_answer,
) -> EvalRecord:
    """Run the pipeline on one task and score it; errors become a failed record."""
    base = EvalRecord(
        task_id=task.task_id,
        cell=task.cell,
        question=task.question,
        gold=task.gold_answer,
        choices=task.choices,
    )
    try:
        result = await run_pipeline(
            task.question,
            task.document,
            config,
            backend,
            templates,
            counter,
            task_kind=task.task_kind,
        )
    except SegmentPlusError as e:
        logger.error(f"Task {task.task_id} failed: {type(e).__name__}: {e}")
        return base.model_copy(update={"failed": True, "error": f"{type(e).__name__}: {e}"})

    stats = result.trace.stats
    return base.model_copy(
        update={
            "prediction": result.answer,
            "em": exact_match(result.answer, task.gold_answer, normalizer),
            "f1": token_f1(result.answer, task.gold_answer, normalizer),
            "trace_stats": TraceSummary(
                backend_calls=stats.backend_calls,
                total_tokens=stats.total_tokens,
                iterations=stats.iterations,
                truncated=stats.truncated,
                calls_by_stage=dict(stats.calls_by_stage),
            ),
        }
    )


async def run_eval(
    tasks: Sequence[EvalTask],
    config: PipelineConfig,
    backend_for: BackendFactory,
    templates: Optional[PromptTemplates] = None,
    counter: Optional[TokenCounter] = None,
    *,
    normalizer: Normalizer = normalize_answer,
) -> EvalReport:
    """Run the pipeline over tasks and score the answers.

    Tasks run concurrently, at most ``config.parallelism`` at a time. Records
    keep task order, so reports do not depend on scheduling.

    Args:
        tasks: Tasks to run.
        config: Pipeline configuration.
        backend_for: Returns the backend for a task; the caller owns its lifetime.
        templates: Prompt templates (shipped defaults if omitted).
        counter: Token counter (built-in counter if omitted).
        normalizer: Answer normalization used by EM and F1.

    Returns:
        Records and summary.

    Raises:
        EmptyTaskSet: If ``tasks`` is empty.
        ConfigInvalid: If the configuration is invalid.
    """
    if not tasks:
        raise EmptyTaskSet("No tasks to evaluate")
    validate_config(config)
    templates = templates or default_templates()
    counter = counter or default_counter()
    semaphore = asyncio.Semaphore(config.parallelism)

    async def _one(task: EvalTask) -> EvalRecord:
        async with semaphore:
            return await evaluate_task(
                task, config, backend_for(task), templates, counter, normalizer
            )

    records = list(await asyncio.gather(*(_one(t) for t in tasks)))
    summary = summarize(records)
    logger.info(
        f"Evaluated {summary.n_items} tasks: EM {summary.mean_em:.3f}, "
        f"F1 {summary.mean_f1:.3f}, {summary.failed} failed"
    )
    return EvalReport(records=records, summary=summary)


def _override(
    config: PipelineConfig, dimension: SweepDimension, value: Union[str, int]
) -> Tuple[PipelineConfig, str]:
    if dimension == SweepDimension.SEGMENT_SIZE:
        size = int(value)
        return config.model_copy(update={"segment_size": size}), str(size)
    mode = PipelineMode(str(value).lower())
    return config.model_copy(update={"mode": mode}), mode.value


async def run_sweep(
    dimension: SweepDimension,
    values: Sequence[Union[str, int]],
    tasks: Sequence[EvalTask],
    base_config: PipelineConfig,
    backend_for: BackendFactory,
    templates: Optional[PromptTemplates] = None,
    counter: Optional[TokenCounter] = None,
    *,
    normalizer: Normalizer = normalize_answer,
) -> SweepReport:
    """Evaluate the same tasks once per value of one configuration dimension.

    Values run one after another; failed items are counted in each row.

    Raises:
        EmptySweep: If ``values`` is empty.
        EmptyTaskSet: If ``tasks`` is empty.
    """
    if not values:
        raise EmptySweep(f"No values to sweep over {dimension.value}")
    rows: List[SweepRow] = []
    for value in values:
        config, label = _override(base_config, dimension, value)
        logger.info(f"Sweep {dimension.value} = {label}")
        report = await run_eval(
            tasks, config, backend_for, templates, counter, normalizer=normalizer
        )
        calls: Dict[str, int] = {}
        for r in report.records:
            for stage, n in r.trace_stats.calls_by_stage.items():
                calls[stage] = calls.get(stage, 0) + n
        rows.append(
            SweepRow(
                value=label,
                mean_em=report.summary.mean_em,
                mean_f1=report.summary.mean_f1,
                failed=report.summary.failed,
                backend_calls=report.summary.backend_calls,
                calls_by_stage=dict(sorted(calls.items())),
                total_tokens=sum(r.trace_stats.total_tokens for r in report.records),
                mean_iterations=sum(r.trace_stats.iterations for r in report.records)
                / len(report.records),
                truncated=sum(r.trace_stats.truncated for r in report.records),
            )
        )
    return SweepReport(
        dimension=dimension.value,
        rows=rows,
        extra={"n_tasks": len(tasks), "base_config": base_config.model_dump(mode="json")},
    )
