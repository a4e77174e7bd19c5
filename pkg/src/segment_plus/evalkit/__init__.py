"""Scoring, evaluation harnesses and reports."""

from .metrics import normalize_answer, exact_match, token_f1, best_over_golds
from .judge import parse_judge_score, format_choices, judge_record, run_judge_eval
from .harness import (
    task_from_haystack,
    load_eval_tasks,
    summarize,
    evaluate_task,
    run_eval,
    run_sweep,
)
from .report import (
    report_to_jsonl,
    sweep_to_jsonl,
    format_table,
    format_eval_summary,
    format_sweep,
    sweep_to_csv,
    format_trace,
    write_text,
)

__all__ = [
    "normalize_answer",
    "exact_match",
    "token_f1",
    "best_over_golds",
    "parse_judge_score",
    "format_choices",
    "judge_record",
    "run_judge_eval",
    "task_from_haystack",
    "load_eval_tasks",
    "summarize",
    "evaluate_task",
    "run_eval",
    "run_sweep",
    "report_to_jsonl",
    "sweep_to_jsonl",
    "format_table",
    "format_eval_summary",
    "format_sweep",
    "sweep_to_csv",
    "format_trace",
    "write_text",
]
