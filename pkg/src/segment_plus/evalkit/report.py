"""Report emission: JSON lines, aligned text tables, CSV and trace views."""

import csv
import io
import json
from pathlib import Path
from typing import List, Optional, Sequence

from segment_plus.models import (
    EvalReport,
    PipelineTrace,
    SweepReport,
    TraceEventKind,
)


def report_to_jsonl(report: EvalReport) -> str:
    """One line per record, then a ``{"summary": ...}`` line."""
    lines = [json.dumps(r.model_dump(mode="json"), sort_keys=True) for r in report.records]
    lines.append(json.dumps({"summary": report.summary.model_dump(mode="json")}, sort_keys=True))
    return "\n".join(lines) + "\n"


def sweep_to_jsonl(report: SweepReport) -> str:
    """One line per sweep row, then a header line with the dimension."""
    lines = [json.dumps(r.model_dump(mode="json"), sort_keys=True) for r in report.rows]
    lines.append(
        json.dumps({"dimension": report.dimension, "extra": report.extra}, sort_keys=True)
    )
    return "\n".join(lines) + "\n"


def format_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Left-aligned text columns separated by two spaces."""
    cells = [[str(h) for h in headers]] + [[_fmt(v) for v in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _fmt(value: object) -> str:
    if isinstance(value, float):
        return f"{value:.3f}"
    if value is None:
        return "-"
    return str(value)


def format_eval_summary(report: EvalReport) -> str:
    """Per-cell table followed by the overall row."""
    s = report.summary
    rows: List[List[object]] = [
        [c.cell, c.n_items, c.mean_em, c.mean_f1, c.failed, c.backend_calls] for c in s.cells
    ]
    rows.append(["all", s.n_items, s.mean_em, s.mean_f1, s.failed, s.backend_calls])
    table = format_table(["cell", "items", "em", "f1", "failed", "calls"], rows)
    if s.mean_judge is not None:
        table += f"\njudge mean: {s.mean_judge:.1f}"
    return table


def format_sweep(report: SweepReport) -> str:
    """One row per sweep value with scores and cost."""
    stages = sorted({k for r in report.rows for k in r.calls_by_stage})
    headers = [report.dimension, "em", "f1", "failed", "calls"] + stages + [
        "tokens",
        "iters",
        "truncated",
    ]
    rows = [
        [r.value, r.mean_em, r.mean_f1, r.failed, r.backend_calls]
        + [r.calls_by_stage.get(k, 0) for k in stages]
        + [r.total_tokens, r.mean_iterations, r.truncated]
        for r in report.rows
    ]
    return format_table(headers, rows)


def sweep_to_csv(report: SweepReport) -> str:
    """Sweep table as CSV text."""
    stages = sorted({k for r in report.rows for k in r.calls_by_stage})
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        [report.dimension, "mean_em", "mean_f1", "failed", "backend_calls"]
        + [f"calls_{k}" for k in stages]
        + ["total_tokens", "mean_iterations", "truncated"]
    )
    for r in report.rows:
        writer.writerow(
            [r.value, r.mean_em, r.mean_f1, r.failed, r.backend_calls]
            + [r.calls_by_stage.get(k, 0) for k in stages]
            + [r.total_tokens, r.mean_iterations, r.truncated]
        )
    return buffer.getvalue()


def write_text(text: str, path: Optional[Path]) -> None:
    """Write text to ``path`` with Unix newlines, creating parent directories."""
    if path is None:
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _clip(text: str, width: int = 100) -> str:
    flat = " ".join(str(text).split())
    return flat if len(flat) <= width else flat[: width - 3] + "..."


def format_trace(trace: PipelineTrace, show_calls: bool = False) -> str:
    """Human-readable view of a trace, grouped by stage and iteration."""
    lines: List[str] = []
    header = None
    for e in trace.events:
        if e.event == TraceEventKind.CALL and not show_calls:
            continue
        stage = e.stage.value if e.stage is not None else "setup"
        current = stage if e.iteration is None else f"{stage} / iteration {e.iteration}"
        if current != header:
            lines.append(f"== {current}")
            header = current
        d = e.data
        if e.event == TraceEventKind.SEGMENTS:
            lines.append(f"  {d['count']} segments, tokens {d['token_counts']}")
        elif e.event == TraceEventKind.GATHER:
            lines.append(f"  [{d['segment']}] evidence: {_clip(d['evidence']) or '-'}")
        elif e.event == TraceEventKind.LABEL:
            lines.append(f"  [{d['segment']}] {d['label']} ({d['source']})")
        elif e.event == TraceEventKind.BATCHES:
            lines.append(f"  batches {d['spans']} tokens {d['tokens']}")
        elif e.event == TraceEventKind.MERGE:
            lines.append(f"  {d['span']} gen {d['generation']}: {_clip(d['evidence']) or '-'}")
        elif e.event == TraceEventKind.ITERATION:
            lines.append(
                f"  notes {d['notes_in']} -> {d['notes_out']}, "
                f"tokens {d['tokens_in']} -> {d['tokens_out']}"
            )
        elif e.event == TraceEventKind.TRUNCATION:
            lines.append(f"  truncated ({d['reason']}): {d['tokens_before']} -> {d['tokens_after']} tokens")
        elif e.event == TraceEventKind.ANSWER:
            lines.append(f"  answer: {d['answer']}")
        else:
            lines.append(f"  call x{d['attempts']}: {_clip(d['response'])}")
    s = trace.stats
    lines.append(
        f"== stats: {s.backend_calls} calls {dict(s.calls_by_stage)}, {s.total_tokens} tokens, "
        f"{s.iterations} iterations, truncated={s.truncated}"
    )
    return "\n".join(lines)
