"""Tests for haystack task generation."""

import pytest

from segment_plus.haystack import (
    build_haystack,
    generate_noise,
    load_suite,
    make_grid,
    make_task_suite,
    noise_seed,
    split_sentences,
    split_with_breaks,
    uniform_depths,
    write_suite,
)
from segment_plus.haystack.generator import LOCATIONS, OBJECTS, PEOPLE
from segment_plus.models import HaystackTask, TaskKind
from segment_plus.utils import NoiseTooShort


def _task(facts, depths, target, required=None):
    return HaystackTask(
        task_id="t-000",
        kind=TaskKind.SINGLE_FACT,
        facts=facts,
        question="Where is Mary?",
        gold_answer="bathroom",
        required_facts=required or list(range(len(facts))),
        target_tokens=target,
        depths=depths,
        seed=1,
    )


class TestNoise:
    """Test suite for the filler generator."""

    def test_deterministic_and_long_enough(self, counter):
        """Test equal seeds give equal text of the requested size."""
        a = generate_noise(2000, 5, counter)
        assert a == generate_noise(2000, 5, counter)
        assert a != generate_noise(2000, 6, counter)
        assert counter.count(a) >= 2000

    def test_free_of_task_vocabulary(self, counter):
        """Test filler never names task people, objects or places."""
        text = generate_noise(20000, 1, counter).lower()
        words = set(text.replace(".", " ").replace(",", " ").split())
        vocab = {w.lower() for w in PEOPLE + OBJECTS + LOCATIONS}
        assert not words & vocab

    def test_split_sentences(self):
        """Test sentence splitting at terminal punctuation."""
        assert split_sentences("A b. C d!\n\nE f? ") == ["A b.", "C d!", "E f?"]

    def test_split_with_breaks(self):
        """Test each sentence keeps the whitespace that followed it."""
        text = "A b. C d!\n\nE f? "
        pairs = split_with_breaks(text)
        assert pairs == [("A b.", " "), ("C d!", "\n\n"), ("E f?", "")]
        assert "".join(s + b for s, b in pairs) == text.strip()
        assert split_with_breaks("  ") == []


class TestBuildHaystack:
    """Test suite for build_haystack."""

    def test_zero_length_is_facts_only(self, counter):
        """Test the 0k setting holds only the facts."""
        task = _task(["Mary took the apple.", "Mary moved to the garden."], [0.3, 0.6], 0)
        assert build_haystack(task, "", counter) == "Mary took the apple. Mary moved to the garden."

    def test_single_fact_depth(self, counter):
        """Test a mid-depth fact starts near the middle."""
        fact = "Mary moved to the bathroom."
        task = _task([fact], [0.5], 4096)
        doc = build_haystack(task, generate_noise(4096, 3, counter), counter)
        offset = counter.count(doc[: doc.index(fact)])
        assert 0.45 * 4096 <= offset <= 0.55 * 4096
        assert abs(counter.count(doc) - 4096) <= 0.02 * 4096

    def test_fact_order_and_uniqueness(self, counter):
        """Test facts appear once each in depth order."""
        facts = [
            "John took the football.",
            "John gave the football to Mary.",
            "Mary went to the hallway.",
        ]
        task = _task(facts, [0.1, 0.5, 0.9], 8192)
        doc = build_haystack(task, generate_noise(8192, 4, counter), counter)
        positions = [doc.index(f) for f in facts]
        assert positions == sorted(positions)
        assert all(doc.count(f) == 1 for f in facts)

    def test_edge_depths(self, counter):
        """Test depths 0 and 1 place facts at the ends."""
        facts = ["Mary took the apple.", "Mary moved to the garden."]
        task = _task(facts, [0.0, 1.0], 4096)
        doc = build_haystack(task, generate_noise(4096, 2, counter), counter)
        assert doc.startswith(facts[0])
        assert doc.endswith(facts[1])

    def test_paragraph_breaks_survive(self, counter):
        """Test the filler's paragraph breaks stay in the document around the facts."""
        facts = ["John took the football.", "Mary went to the hallway."]
        task = _task(facts, [0.25, 0.75], 4096)
        noise = generate_noise(4096, 9, counter)
        assert "\n\n" in noise
        doc = build_haystack(task, noise, counter)
        assert "\n\n" in doc
        assert doc.index(facts[0]) < doc.index(facts[1])
        stripped = doc
        for fact in facts:
            stripped = stripped.replace(fact + " ", "", 1)
        assert noise.startswith(stripped)

    def test_noise_too_short(self, counter):
        """Test a short corpus is rejected."""
        task = _task(["Mary moved to the bathroom."], [0.5], 4096)
        with pytest.raises(NoiseTooShort):
            build_haystack(task, generate_noise(1000, 1, counter), counter)

    def test_deterministic(self, counter):
        """Test identical inputs give identical bytes."""
        task = _task(["Mary moved to the bathroom."], [0.5], 8192)
        noise = generate_noise(8192, noise_seed(task), counter)
        assert build_haystack(task, noise, counter) == build_haystack(task, noise, counter)


class TestTaskSuite:
    """Test suite for make_task_suite and suite files."""

    def test_single_fact_shape(self):
        """Test single-fact tasks ask for a person's location."""
        task = make_task_suite(TaskKind.SINGLE_FACT, 1, 7)[0]
        assert len(task.facts) == 1
        person = task.question.removeprefix("Where is ").rstrip("?")
        assert task.facts[0].startswith(person)
        assert task.facts[0].endswith(f"the {task.gold_answer}.")
        assert task.required_facts == [0]
        assert task.target_tokens == 0

    def test_two_fact_chain(self):
        """Test two-fact tasks chain a pickup and a move."""
        task = make_task_suite(TaskKind.TWO_FACT, 1, 7)[0]
        thing = task.question.removeprefix("Where is the ").rstrip("?")
        person = task.facts[0].split()[0]
        assert thing in task.facts[0]
        assert task.facts[1].startswith(person)
        assert task.facts[1].endswith(f"the {task.gold_answer}.")
        assert task.required_facts == [0, 1]

    def test_three_fact_chain(self):
        """Test three-fact tasks hand the object to a second person."""
        task = make_task_suite(TaskKind.THREE_FACT, 1, 7)[0]
        giver = task.facts[0].split()[0]
        receiver = task.facts[1].rstrip(".").split()[-1]
        assert giver != receiver
        assert task.facts[1].startswith(giver)
        assert task.facts[2].startswith(receiver)
        assert task.facts[2].endswith(f"the {task.gold_answer}.")

    def test_distinct_and_deterministic(self):
        """Test 25 distinct tasks, identical under the same seed."""
        suite = make_task_suite(TaskKind.TWO_FACT, 25, 7, target_tokens=4096)
        assert len({tuple(t.facts) for t in suite}) == 25
        assert suite == make_task_suite(TaskKind.TWO_FACT, 25, 7, target_tokens=4096)
        assert all(t.depths == uniform_depths(2) for t in suite)

    def test_lengths_share_questions(self):
        """Test suites for different lengths hold the same facts."""
        short = make_task_suite(TaskKind.SINGLE_FACT, 5, 3, target_tokens=0)
        long = make_task_suite(TaskKind.SINGLE_FACT, 5, 3, target_tokens=8192)
        assert [t.facts for t in short] == [t.facts for t in long]
        assert short[0].task_id == "single-0-000"
        assert long[0].task_id == "single-8192-000"

    def test_rejects_bad_input(self):
        """Test invalid item counts and lengths."""
        with pytest.raises(ValueError):
            make_task_suite(TaskKind.SINGLE_FACT, 0, 1)
        with pytest.raises(ValueError):
            make_grid([TaskKind.SINGLE_FACT], [5000], 1, 1)

    def test_write_and_load(self, tmp_path, counter):
        """Test suite files are written deterministically and read back."""
        tasks = make_grid([TaskKind.SINGLE_FACT], [0, 4096], 2, 7)
        out_a = write_suite(tasks, tmp_path / "a", counter)
        out_b = write_suite(tasks, tmp_path / "b", counter)
        assert out_a.read_bytes() == out_b.read_bytes()
        loaded = load_suite(out_a)
        assert [t.task_id for t in loaded] == [t.task_id for t in tasks]
        for task in loaded:
            doc = (out_a.parent / task.document_path).read_text()
            assert doc == (out_b.parent / task.document_path).read_text()
            assert all(f in doc for f in task.facts)
