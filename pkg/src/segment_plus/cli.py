"""CLI entry point for the Segment+ pipeline."""

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from segment_plus.backend import AbstractBackend, HttpBackend, OracleBackend
from segment_plus.config import build_config, load_config_file
from segment_plus.evalkit import (
    format_eval_summary,
    format_sweep,
    format_trace,
    load_eval_tasks,
    report_to_jsonl,
    run_eval,
    run_judge_eval,
    run_sweep,
    summarize,
    sweep_to_csv,
    sweep_to_jsonl,
    write_text,
)
from segment_plus.haystack import KIND_CODES, load_noise, make_grid, write_suite
from segment_plus.models import (
    EvalReport,
    EvalTask,
    EvidenceMerge,
    OracleRegistry,
    PipelineConfig,
    PipelineMode,
    PipelineTrace,
    SweepDimension,
    TaskKind,
)
from segment_plus.pipeline import PromptTemplates, load_templates, run_pipeline
from segment_plus.tokenwork import TokenCounter, get_counter
from segment_plus.utils import ConfigInvalid, SegmentPlusError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TASK_FAILURE = 1
EXIT_USAGE = 2
DEFAULT_SUITE_DIR = Path("haystack")

KINDS_BY_CODE = {code: kind for kind, code in KIND_CODES.items()}
SWEEP_DIMENSIONS = {"segment-size": SweepDimension.SEGMENT_SIZE, "mode": SweepDimension.MODE}

# argparse dest -> PipelineConfig field
CONFIG_FLAGS = {
    "segment_size": "segment_size",
    "merge_budget": "max_merge_batch_tokens",
    "final_limit": "final_context_limit",
    "reserve": "prompt_overhead_reserve",
    "max_iterations": "max_iterations",
    "parallelism": "parallelism",
    "mode": "mode",
    "evidence_merge": "evidence_merge",
    "temperature": "temperature",
    "model": "model",
    "max_output_tokens": "max_output_tokens",
}


def setup_logging(log_level: str = "INFO") -> None:
    """Configure logging to stderr so stdout carries only results.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR).
    """
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
    )


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="Flat key = value config file")
    common.add_argument("--templates", type=Path, help="Directory of prompt template overrides")
    common.add_argument(
        "--log-level",
        type=str,
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: WARNING)",
    )
    return common


def _pipeline_parser() -> argparse.ArgumentParser:
    pipeline = argparse.ArgumentParser(add_help=False)
    pipeline.add_argument(
        "--backend",
        choices=["http", "oracle"],
        default="http",
        help="Language-model backend (default: http)",
    )
    pipeline.add_argument("--counter", default="wordpiece", help="wordpiece or tiktoken[:encoding]")
    pipeline.add_argument("--model", help="Model name for the HTTP backend")
    pipeline.add_argument("--segment-size", type=int, help="Max tokens per segment")
    pipeline.add_argument("--merge-budget", type=int, help="Max note tokens per merge batch")
    pipeline.add_argument("--final-limit", type=int, help="Token window of the answer prompt")
    pipeline.add_argument("--reserve", type=int, help="Tokens reserved for the answer prompt text")
    pipeline.add_argument("--max-iterations", type=int, help="Cap on merge iterations")
    pipeline.add_argument("--parallelism", type=int, help="Max in-flight backend calls")
    pipeline.add_argument("--temperature", type=float, help="Sampling temperature")
    pipeline.add_argument("--max-output-tokens", type=int, help="Completion token cap per call")
    pipeline.add_argument(
        "--mode", choices=[m.value for m in PipelineMode], help="Pipeline variant"
    )
    pipeline.add_argument(
        "--evidence-merge",
        choices=[m.value for m in EvidenceMerge],
        help="How merged evidence is produced",
    )
    return pipeline


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser for all subcommands."""
    common = _common_parser()
    pipeline = _pipeline_parser()

    parser = argparse.ArgumentParser(
        prog="segplus",
        description="Segment+ question answering over long documents",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ask = sub.add_parser("ask", parents=[common, pipeline], help="Answer one question")
    ask.add_argument("--doc", type=Path, required=True, help="Document text file")
    ask.add_argument("--question", required=True, help="Question to answer")
    ask.add_argument("--registry", type=Path, help="Oracle registry JSON (oracle backend)")
    ask.add_argument("--task-kind", help="Select an answer_<kind> template")
    ask.add_argument("--trace", type=Path, help="Write the trace as JSON lines")

    ev = sub.add_parser("eval", parents=[common, pipeline], help="Evaluate a task file")
    ev.add_argument("--tasks", type=Path, required=True, help="Tasks JSONL file")
    ev.add_argument("--out", type=Path, help="Report JSONL path")
    ev.add_argument("--judge", action="store_true", help="Also score answers with the judge prompt")

    gen = sub.add_parser("haystack-gen", parents=[common], help="Generate haystack tasks")
    gen.add_argument(
        "--kind",
        default="single",
        help="Comma-separated task kinds: single, two, three (default: single)",
    )
    gen.add_argument("--lengths", type=_int_list, default=[0], help="Comma-separated token lengths")
    gen.add_argument(
        "--items", type=int, default=25, help="Tasks per kind and length (default: 25)"
    )
    gen.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    gen.add_argument("--noise", type=Path, help="Plain-text noise corpus (generated if omitted)")
    gen.add_argument("--counter", default="wordpiece", help="wordpiece or tiktoken[:encoding]")
    gen.add_argument(
        "--out",
        type=Path,
        default=DEFAULT_SUITE_DIR,
        help="Output directory (default: %(default)s)",
    )

    sweep = sub.add_parser("sweep", parents=[common, pipeline], help="Sweep one setting")
    sweep.add_argument("--dimension", choices=sorted(SWEEP_DIMENSIONS), required=True)
    sweep.add_argument("--values", required=True, help="Comma-separated values")
    sweep.add_argument("--tasks", type=Path, required=True, help="Tasks JSONL file")
    sweep.add_argument("--out", type=Path, help="Sweep JSONL path")
    sweep.add_argument("--csv", type=Path, help="Sweep CSV path")

    view = sub.add_parser("trace-view", parents=[common], help="Pretty-print a trace file")
    view.add_argument("trace", type=Path, help="Trace JSONL file")
    view.add_argument("--calls", action="store_true", help="Include raw backend calls")

    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Combine defaults, the config file and flags, flags winning."""
    file_values = load_config_file(args.config) if args.config else {}
    flags: Dict[str, Any] = {
        field: getattr(args, dest, None) for dest, field in CONFIG_FLAGS.items()
    }
    return build_config(file_values, flags)


def _templates(args: argparse.Namespace) -> PromptTemplates:
    return load_templates(args.templates)


def _http_backend(config: PipelineConfig) -> HttpBackend:
    return HttpBackend(model=config.model)


def _check_registries(tasks: Sequence[EvalTask]) -> None:
    missing = [t.task_id for t in tasks if t.registry is None]
    if missing:
        raise ConfigInvalid(
            "registry", f"oracle backend needs a registry; missing for {missing[:3]}"
        )


async def _cmd_ask(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    templates = _templates(args)
    counter = get_counter(args.counter)
    document = args.doc.read_text(encoding="utf-8")

    backend: AbstractBackend
    if args.backend == "oracle":
        if args.registry is None:
            raise ConfigInvalid("registry", "--backend oracle requires --registry")
        registry = OracleRegistry.model_validate_json(args.registry.read_text(encoding="utf-8"))
        backend = OracleBackend(registry, templates, counter)
    else:
        backend = _http_backend(config)

    async with backend:
        result = await run_pipeline(
            args.question, document, config, backend, templates, counter, task_kind=args.task_kind
        )

    write_text(result.trace.to_jsonl(), args.trace)
    stats = result.trace.stats
    print(result.answer)
    print(
        f"calls={stats.backend_calls} tokens={stats.total_tokens} "
        f"iterations={stats.iterations} truncated={stats.truncated}",
        file=sys.stderr,
    )
    return EXIT_OK


async def _evaluate(
    args: argparse.Namespace, tasks: List[EvalTask], config: PipelineConfig
) -> EvalReport:
    templates = _templates(args)
    counter = get_counter(args.counter)
    if args.backend == "oracle":
        _check_registries(tasks)
        oracles = {
            t.task_id: OracleBackend(t.registry, templates, counter)
            for t in tasks
            if t.registry is not None
        }
        report = await run_eval(tasks, config, lambda t: oracles[t.task_id], templates, counter)
        if args.judge:
            first = next(iter(oracles.values()))
            records = await run_judge_eval(report.records, first, templates, config.parallelism)
            report = EvalReport(records=records, summary=summarize(records))
        return report

    async with _http_backend(config) as backend:
        report = await run_eval(tasks, config, lambda t: backend, templates, counter)
        if args.judge:
            records = await run_judge_eval(report.records, backend, templates, config.parallelism)
            report = EvalReport(records=records, summary=summarize(records))
    return report


async def _cmd_eval(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    tasks = load_eval_tasks(args.tasks)
    report = await _evaluate(args, tasks, config)
    text = report_to_jsonl(report)
    if args.out:
        write_text(text, args.out)
    else:
        sys.stdout.write(text)
    print(format_eval_summary(report), file=sys.stdout if args.out else sys.stderr)
    return EXIT_TASK_FAILURE if report.summary.failed else EXIT_OK


def _cmd_haystack_gen(args: argparse.Namespace) -> int:
    try:
        kinds: List[TaskKind] = [KINDS_BY_CODE[k.strip()] for k in args.kind.split(",")]
    except KeyError as e:
        raise ConfigInvalid("kind", f"unknown task kind {e.args[0]!r}; use single, two, three")
    counter = get_counter(args.counter)
    noise = load_noise(args.noise) if args.noise else None
    try:
        tasks = make_grid(kinds, args.lengths, args.items, args.seed)
    except ValueError as e:
        raise ConfigInvalid("lengths", str(e))
    tasks_file = write_suite(tasks, args.out, counter, noise)
    print(tasks_file)
    return EXIT_OK


async def _cmd_sweep(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    tasks = load_eval_tasks(args.tasks)
    templates = _templates(args)
    counter = get_counter(args.counter)
    dimension = SWEEP_DIMENSIONS[args.dimension]
    values = [v.strip() for v in args.values.split(",") if v.strip()]

    if args.backend == "oracle":
        _check_registries(tasks)
        oracles = {
            t.task_id: OracleBackend(t.registry, templates, counter)
            for t in tasks
            if t.registry is not None
        }
        report = await run_sweep(
            dimension, values, tasks, config, lambda t: oracles[t.task_id], templates, counter
        )
    else:
        async with _http_backend(config) as backend:
            report = await run_sweep(
                dimension, values, tasks, config, lambda t: backend, templates, counter
            )

    write_text(sweep_to_jsonl(report), args.out)
    write_text(sweep_to_csv(report), args.csv)
    print(format_sweep(report))
    return EXIT_TASK_FAILURE if any(r.failed for r in report.rows) else EXIT_OK


def _cmd_trace_view(args: argparse.Namespace) -> int:
    trace = PipelineTrace.from_jsonl(args.trace.read_text(encoding="utf-8"))
    print(format_trace(trace, show_calls=args.calls))
    return EXIT_OK


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one subcommand and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    try:
        if args.command == "ask":
            return asyncio.run(_cmd_ask(args))
        if args.command == "eval":
            return asyncio.run(_cmd_eval(args))
        if args.command == "haystack-gen":
            return _cmd_haystack_gen(args)
        if args.command == "sweep":
            return asyncio.run(_cmd_sweep(args))
        return _cmd_trace_view(args)
    except ConfigInvalid as e:
        parser.print_usage(sys.stderr)
        print(f"segplus: error: invalid {e.field}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as e:
        print(f"segplus: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SegmentPlusError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_TASK_FAILURE


def main() -> None:
    """Main entry point for the segplus CLI."""
    sys.exit(run_command())


if __name__ == "__main__":
    main()
