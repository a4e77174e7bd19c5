"""Needle-in-a-haystack task suites and documents.

Tasks chain one, two or three templated facts about people, objects and
places. Each fact is inserted verbatim at the sentence boundary nearest its
requested depth in a noise document of a fixed token length.
"""

import bisect
import json
import logging
import random
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from segment_plus.models import HAYSTACK_LENGTHS, HaystackTask, TaskKind
from segment_plus.tokenwork import TokenCounter, default_counter
from segment_plus.utils import NoiseTooShort

from .noise import generate_noise, split_with_breaks

logger = logging.getLogger(__name__)

LENGTH_TOLERANCE = 0.02
TASKS_FILE = "tasks.jsonl"
DOCUMENTS_DIR = "documents"

PEOPLE = ["Mary", "John", "Daniel", "Sandra", "Emily", "Bill", "Fred", "Julie"]
LOCATIONS = ["bathroom", "hallway", "garden", "office", "kitchen", "bedroom", "cellar", "balcony"]
OBJECTS = ["apple", "football", "milk", "book", "umbrella", "key"]
MOVE_VERBS = ["moved to", "went to", "journeyed to", "travelled to"]
TAKE_VERBS = ["took", "picked up", "grabbed"]
GIVE_VERBS = ["gave", "handed", "passed"]

KIND_CODES = {
    TaskKind.SINGLE_FACT: "single",
    TaskKind.TWO_FACT: "two",
    TaskKind.THREE_FACT: "three",
}

# facts, question, gold answer
FactChain = Tuple[List[str], str, str]


def _single_fact(rng: random.Random) -> FactChain:
    person, verb, place = rng.choice(PEOPLE), rng.choice(MOVE_VERBS), rng.choice(LOCATIONS)
    return [f"{person} {verb} the {place}."], f"Where is {person}?", place


def _two_fact(rng: random.Random) -> FactChain:
    person, thing, place = rng.choice(PEOPLE), rng.choice(OBJECTS), rng.choice(LOCATIONS)
    facts = [
        f"{person} {rng.choice(TAKE_VERBS)} the {thing}.",
        f"{person} {rng.choice(MOVE_VERBS)} the {place}.",
    ]
    return facts, f"Where is the {thing}?", place


def _three_fact(rng: random.Random) -> FactChain:
    giver, receiver = rng.sample(PEOPLE, 2)
    thing, place = rng.choice(OBJECTS), rng.choice(LOCATIONS)
    facts = [
        f"{giver} {rng.choice(TAKE_VERBS)} the {thing}.",
        f"{giver} {rng.choice(GIVE_VERBS)} the {thing} to {receiver}.",
        f"{receiver} {rng.choice(MOVE_VERBS)} the {place}.",
    ]
    return facts, f"Where is the {thing}?", place


FACT_BUILDERS: Dict[TaskKind, Callable[[random.Random], FactChain]] = {
    TaskKind.SINGLE_FACT: _single_fact,
    TaskKind.TWO_FACT: _two_fact,
    TaskKind.THREE_FACT: _three_fact,
}


def uniform_depths(n_facts: int) -> List[float]:
    """Evenly spaced depths (i+1)/(n+1), keeping facts away from the edges."""
    return [(i + 1) / (n_facts + 1) for i in range(n_facts)]


def make_task_suite(
    kind: TaskKind,
    n_items: int,
    seed: int,
    target_tokens: int = 0,
    depths: Optional[Sequence[float]] = None,
) -> List[HaystackTask]:
    """Generate distinct tasks of one kind for one haystack length.

    The facts depend only on ``kind`` and ``seed``, so suites for different
    lengths share the same questions.

    Args:
        kind: Number of chained facts.
        n_items: Number of tasks.
        seed: Seed for fact generation.
        target_tokens: Haystack length cell.
        depths: Fact depths; uniform spacing if omitted.

    Returns:
        Tasks with ids ``<kind>-<length>-<index>``.

    Raises:
        ValueError: If ``n_items`` < 1 or not enough distinct tasks exist.
    """
    if n_items < 1:
        raise ValueError("n_items must be at least 1")
    rng = random.Random(f"{seed}:{kind.value}")
    build = FACT_BUILDERS[kind]
    seen: Set[Tuple[str, ...]] = set()
    tasks: List[HaystackTask] = []
    attempts = 0
    while len(tasks) < n_items:
        attempts += 1
        if attempts > 1000 * n_items:
            raise ValueError(f"Could not generate {n_items} distinct {kind.value} tasks")
        facts, question, gold = build(rng)
        key = tuple(facts)
        if key in seen:
            continue
        seen.add(key)
        task_depths = list(depths) if depths is not None else uniform_depths(len(facts))
        tasks.append(
            HaystackTask(
                task_id=f"{KIND_CODES[kind]}-{target_tokens}-{len(tasks):03d}",
                kind=kind,
                facts=facts,
                question=question,
                gold_answer=gold,
                required_facts=list(range(len(facts))),
                target_tokens=target_tokens,
                depths=task_depths,
                seed=seed,
            )
        )
    logger.debug(f"Generated {n_items} {kind.value} tasks at {target_tokens} tokens")
    return tasks


def build_haystack(
    task: HaystackTask,
    noise_corpus: str,
    counter: Optional[TokenCounter] = None,
) -> str:
    """Embed a task's facts in noise at their requested depths.

    Noise sentences are taken from the start of the corpus, with the
    whitespace between them, until the document reaches the target length;
    fact ``i`` is inserted before the sentence boundary nearest ``depths[i]``
    of the way through the noise.

    Args:
        task: Task with facts, depths and target length.
        noise_corpus: Filler text with at least ``target_tokens`` tokens.
        counter: Token counter (built-in counter if omitted).

    Returns:
        The document; exactly the facts joined by spaces for a zero target.

    Raises:
        NoiseTooShort: If the corpus cannot fill the target length.
    """
    if task.target_tokens == 0:
        return " ".join(task.facts)
    counter = counter or default_counter()

    target = task.target_tokens
    fact_tokens = sum(counter.count(f) for f in task.facts)
    noise_budget = target - fact_tokens

    chosen: List[Tuple[str, str]] = []
    offsets = [0]
    for sentence, gap in split_with_breaks(noise_corpus):
        if offsets[-1] >= noise_budget:
            break
        chosen.append((sentence, gap))
        offsets.append(offsets[-1] + counter.count(sentence))
    if offsets[-1] < noise_budget or counter.count(noise_corpus) < target:
        raise NoiseTooShort(
            f"Noise corpus too short for {target} tokens (task {task.task_id})"
        )

    # Boundary j sits before chosen[j]; depth is a fraction of the noise length
    slots: List[int] = []
    for depth in task.depths:
        want = depth * offsets[-1]
        j = bisect.bisect_left(offsets, want)
        if j > 0 and (j == len(offsets) or want - offsets[j - 1] <= offsets[j] - want):
            j -= 1
        slots.append(max(j, slots[-1] if slots else 0))

    # Each piece keeps the whitespace that followed it, so paragraph breaks survive
    pieces: List[Tuple[str, str]] = []
    fact_iter = iter(zip(slots, task.facts))
    pending = next(fact_iter, None)
    for j in range(len(chosen) + 1):
        while pending is not None and pending[0] == j:
            pieces.append((pending[1], " "))
            pending = next(fact_iter, None)
        if j < len(chosen):
            pieces.append(chosen[j])

    document = "".join(text + (gap or " ") for text, gap in pieces[:-1]) + pieces[-1][0]
    total = counter.count(document)
    if abs(total - target) > LENGTH_TOLERANCE * target:
        logger.warning(f"Task {task.task_id}: document has {total} tokens, target {target}")
    return document


def noise_seed(task: HaystackTask) -> str:
    """Seed for the generated noise of one task."""
    return f"{task.seed}:{task.task_id}"


def write_suite(
    tasks: Sequence[HaystackTask],
    out_dir: Path,
    counter: Optional[TokenCounter] = None,
    noise_corpus: Optional[str] = None,
) -> Path:
    """Write task records and documents.

    Layout: ``<out_dir>/tasks.jsonl`` and ``<out_dir>/documents/<task_id>.txt``.
    Output bytes depend only on the tasks and the corpus.

    Args:
        tasks: Tasks to write.
        out_dir: Output directory, created if needed.
        counter: Token counter (built-in counter if omitted).
        noise_corpus: Shared noise corpus; generated per task if omitted.

    Returns:
        Path of the tasks file.
    """
    counter = counter or default_counter()
    out_dir = Path(out_dir)
    (out_dir / DOCUMENTS_DIR).mkdir(parents=True, exist_ok=True)

    lines: List[str] = []
    for task in tasks:
        noise = noise_corpus
        if noise is None:
            noise = generate_noise(task.target_tokens, noise_seed(task), counter)
        document = build_haystack(task, noise, counter)
        relative = f"{DOCUMENTS_DIR}/{task.task_id}.txt"
        (out_dir / relative).write_text(document, encoding="utf-8", newline="\n")
        record = task.model_copy(update={"document_path": relative})
        lines.append(json.dumps(record.model_dump(mode="json"), sort_keys=True))

    tasks_file = out_dir / TASKS_FILE
    tasks_file.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    logger.info(f"Wrote {len(tasks)} tasks to {tasks_file}")
    return tasks_file


def load_suite(path: Path) -> List[HaystackTask]:
    """Read task records written by :func:`write_suite`."""
    tasks: List[HaystackTask] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            tasks.append(HaystackTask.model_validate_json(line))
    return tasks


def make_grid(
    kinds: Sequence[TaskKind],
    lengths: Sequence[int],
    n_items: int,
    seed: int,
) -> List[HaystackTask]:
    """Tasks for every (kind, length) cell.

    Raises:
        ValueError: If a length is not a supported haystack length.
    """
    tasks: List[HaystackTask] = []
    for length in lengths:
        if length not in HAYSTACK_LENGTHS:
            raise ValueError(f"Unsupported haystack length {length}; use one of {HAYSTACK_LENGTHS}")
    for kind in kinds:
        for length in lengths:
            tasks.extend(make_task_suite(kind, n_items, seed, target_tokens=length))
    return tasks
