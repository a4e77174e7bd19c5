"""Tests for the segplus command-line interface."""

import json

import pytest

from segment_plus.cli import EXIT_OK, EXIT_TASK_FAILURE, EXIT_USAGE, run_command
from segment_plus.models import PipelineTrace, Stage, TraceEventKind


@pytest.fixture
def suite(tmp_path):
    """Generate a small oracle-solvable suite and return its tasks file."""
    out = tmp_path / "suite"
    code = run_command(
        ["haystack-gen", "--kind", "single,two", "--lengths", "0,4096", "--items", "2",
         "--seed", "3", "--out", str(out)]
    )
    assert code == EXIT_OK
    return out / "tasks.jsonl"


@pytest.fixture
def registry_file(tmp_path, registry):
    """Write the single-fact registry as JSON."""
    path = tmp_path / "registry.json"
    path.write_text(registry.model_dump_json())
    return path


class TestHaystackGen:
    """Test suite for the haystack-gen subcommand."""

    def test_layout(self, suite):
        """Test the tasks file and one document per task are written."""
        lines = suite.read_text().splitlines()
        assert len(lines) == 8
        documents = sorted(p.name for p in (suite.parent / "documents").iterdir())
        assert len(documents) == 8
        assert "single-0-000.txt" in documents

    def test_deterministic(self, suite, tmp_path):
        """Test a second run with the same seed writes identical bytes."""
        again = tmp_path / "again"
        run_command(
            ["haystack-gen", "--kind", "single,two", "--lengths", "0,4096", "--items", "2",
             "--seed", "3", "--out", str(again)]
        )
        assert (again / "tasks.jsonl").read_bytes() == suite.read_bytes()
        for doc in (suite.parent / "documents").iterdir():
            assert (again / "documents" / doc.name).read_bytes() == doc.read_bytes()

    def test_default_out_dir(self, tmp_path, monkeypatch):
        """Test the suite lands in ./haystack when --out is omitted."""
        monkeypatch.chdir(tmp_path)
        code = run_command(
            ["haystack-gen", "--kind", "single", "--lengths", "0,4096", "--items", "25",
             "--seed", "7"]
        )
        assert code == EXIT_OK
        out = tmp_path / "haystack"
        assert len((out / "tasks.jsonl").read_text().splitlines()) == 50
        documents = sorted(p.name for p in (out / "documents").iterdir())
        assert len(documents) == 50
        assert "single-4096-024.txt" in documents

    def test_unknown_kind(self, tmp_path):
        """Test unknown task kinds are usage errors."""
        code = run_command(["haystack-gen", "--kind", "four", "--out", str(tmp_path)])
        assert code == EXIT_USAGE


class TestAsk:
    """Test suite for the ask subcommand."""

    def test_oracle_answer(self, tmp_path, registry_file, capsys):
        """Test the answer goes to stdout and the trace to a file."""
        doc = tmp_path / "doc.txt"
        doc.write_text("The lamp was dim. Mary moved to the bathroom. The rain kept falling.")
        trace_path = tmp_path / "trace.jsonl"
        code = run_command(
            ["ask", "--backend", "oracle", "--registry", str(registry_file), "--doc", str(doc),
             "--question", "Where is Mary?", "--trace", str(trace_path)]
        )
        out, err = capsys.readouterr()
        assert code == EXIT_OK
        assert out.strip() == "bathroom"
        assert "calls=" in err
        trace = PipelineTrace.from_jsonl(trace_path.read_text())
        assert trace.events[-1].event == TraceEventKind.ANSWER

    @pytest.mark.parametrize(
        "mode,filtered,structured",
        [("nolabel", False, True), ("nostructure", True, False), ("normal", False, False)],
    )
    def test_mode_reaches_branch(self, tmp_path, registry_file, mode, filtered, structured):
        """Test --mode selects the matching pipeline branch in the trace."""
        doc = tmp_path / "doc.txt"
        doc.write_text("The lamp was dim. Mary moved to the bathroom. The rain kept falling.")
        trace_path = tmp_path / "trace.jsonl"
        code = run_command(
            ["ask", "--backend", "oracle", "--registry", str(registry_file), "--doc", str(doc),
             "--question", "Where is Mary?", "--mode", mode, "--trace", str(trace_path)]
        )
        assert code == EXIT_OK
        trace = PipelineTrace.from_jsonl(trace_path.read_text())
        assert (trace.stats.calls(Stage.FILTER) > 0) == filtered
        gathers = trace.of_kind(TraceEventKind.GATHER)
        assert all((e.data["kind"] == "structured") == structured for e in gathers)

    def test_oracle_requires_registry(self, tmp_path):
        """Test the oracle backend without a registry is a usage error."""
        doc = tmp_path / "doc.txt"
        doc.write_text("Mary moved to the bathroom.")
        code = run_command(["ask", "--backend", "oracle", "--doc", str(doc), "--question", "Q?"])
        assert code == EXIT_USAGE

    def test_invalid_config(self, tmp_path, registry_file, capsys):
        """Test constraint violations exit 2 naming the field."""
        doc = tmp_path / "doc.txt"
        doc.write_text("Mary moved to the bathroom.")
        code = run_command(
            ["ask", "--backend", "oracle", "--registry", str(registry_file), "--doc", str(doc),
             "--question", "Where is Mary?", "--parallelism", "0"]
        )
        assert code == EXIT_USAGE
        assert "parallelism" in capsys.readouterr().err

    def test_empty_document(self, tmp_path, registry_file):
        """Test an empty document is a task failure."""
        doc = tmp_path / "doc.txt"
        doc.write_text("  \n")
        code = run_command(
            ["ask", "--backend", "oracle", "--registry", str(registry_file), "--doc", str(doc),
             "--question", "Where is Mary?"]
        )
        assert code == EXIT_TASK_FAILURE

    def test_unknown_flag(self):
        """Test argparse rejects unknown flags with exit 2."""
        with pytest.raises(SystemExit) as exc:
            run_command(["ask", "--bogus"])
        assert exc.value.code == 2


@pytest.mark.oracle
class TestEvalAndSweep:
    """Test suite for the eval and sweep subcommands."""

    def test_eval(self, suite, tmp_path, capsys):
        """Test oracle evaluation scores every item."""
        out = tmp_path / "report.jsonl"
        code = run_command(
            ["eval", "--backend", "oracle", "--tasks", str(suite), "--out", str(out)]
        )
        assert code == EXIT_OK
        summary = json.loads(out.read_text().splitlines()[-1])["summary"]
        assert summary["n_items"] == 8
        assert summary["mean_em"] == 1.0
        assert "all" in capsys.readouterr().out

    def test_eval_with_judge(self, suite, tmp_path):
        """Test the judge fills a score for each record."""
        out = tmp_path / "report.jsonl"
        code = run_command(
            ["eval", "--backend", "oracle", "--tasks", str(suite), "--out", str(out), "--judge"]
        )
        assert code == EXIT_OK
        records = [json.loads(line) for line in out.read_text().splitlines()[:-1]]
        assert all(r["judge_score"] == 100.0 for r in records)

    def test_sweep(self, suite, tmp_path, capsys):
        """Test a mode sweep writes JSONL and CSV."""
        out, csv_path = tmp_path / "sweep.jsonl", tmp_path / "sweep.csv"
        code = run_command(
            ["sweep", "--backend", "oracle", "--tasks", str(suite), "--dimension", "mode",
             "--values", "full,normal", "--out", str(out), "--csv", str(csv_path)]
        )
        assert code == EXIT_OK
        rows = [json.loads(line) for line in out.read_text().splitlines()[:-1]]
        assert [r["value"] for r in rows] == ["full", "normal"]
        assert csv_path.read_text().startswith("mode,mean_em")
        assert "normal" in capsys.readouterr().out

    def test_trace_view(self, tmp_path, registry_file, capsys):
        """Test trace-view renders stages and stats."""
        doc = tmp_path / "doc.txt"
        doc.write_text("Mary moved to the bathroom.")
        trace_path = tmp_path / "trace.jsonl"
        run_command(
            ["ask", "--backend", "oracle", "--registry", str(registry_file), "--doc", str(doc),
             "--question", "Where is Mary?", "--trace", str(trace_path)]
        )
        capsys.readouterr()
        assert run_command(["trace-view", str(trace_path)]) == EXIT_OK
        view = capsys.readouterr().out
        assert "== gather" in view
        assert "answer: bathroom" in view
        assert "== stats:" in view
