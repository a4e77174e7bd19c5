"""Prompt templates with named slots.

Templates are plain-text assets using ``{slot}`` placeholders. Only declared
slot names are substituted, in a single pass, so literal JSON braces in a
prompt stay untouched and slot values are never expanded a second time.
"""

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Pattern, Tuple

from segment_plus.config import PROMPT_DIR
from segment_plus.utils import TemplateError

logger = logging.getLogger(__name__)

SLOT_PATTERN = re.compile(r"\{([a-z_]+)\}")

# Template name -> declared slots
TEMPLATE_SLOTS: Dict[str, Tuple[str, ...]] = {
    "gather": ("segment", "question"),
    "filter": ("question", "note_json"),
    "merge": ("notes", "question"),
    "answer": ("context", "question"),
    "gather_free": ("segment", "question"),
    "filter_free": ("question", "answer"),
    "merge_free": ("notes", "question"),
    "judge": ("question", "answer", "prediction"),
    "judge_choice": ("question", "answer", "prediction"),
}


class PromptTemplate:
    """A prompt with a fixed set of named slots."""

    def __init__(self, name: str, text: str, slots: Tuple[str, ...]):
        """Validate and store a template.

        Args:
            name: Template name, for error messages.
            text: Template text with ``{slot}`` placeholders.
            slots: Slots the template must contain, and nothing else.

        Raises:
            TemplateError: If declared and present slots differ.
        """
        found = set(SLOT_PATTERN.findall(text))
        declared = set(slots)
        if found != declared:
            missing = sorted(declared - found)
            extra = sorted(found - declared)
            raise TemplateError(
                f"Template {name!r}: missing slots {missing}, undeclared slots {extra}"
            )
        self.name = name
        self.text = text
        self.slots = tuple(slots)
        self._inverse: Optional[Pattern[str]] = None

    def render(self, **values: str) -> str:
        """Fill every slot.

        Raises:
            TemplateError: If a slot value is missing or unknown.
        """
        if set(values) != set(self.slots):
            raise TemplateError(
                f"Template {self.name!r} expects {sorted(self.slots)}, got {sorted(values)}"
            )

        def _fill(match: "re.Match[str]") -> str:
            key = match.group(1)
            return values[key] if key in values else match.group(0)

        return SLOT_PATTERN.sub(_fill, self.text)

    def parse(self, rendered: str) -> Optional[Dict[str, str]]:
        """Recover slot values from a prompt rendered with this template.

        Returns:
            Slot values, or None if ``rendered`` does not match.
        """
        if self._inverse is None:
            parts = SLOT_PATTERN.split(self.text)
            pattern = []
            seen = set()
            for i, part in enumerate(parts):
                if i % 2 == 0:
                    pattern.append(re.escape(part))
                elif part in seen:
                    pattern.append(f"(?P={part})")
                else:
                    seen.add(part)
                    pattern.append(f"(?P<{part}>.*?)")
            self._inverse = re.compile("".join(pattern), re.DOTALL)
        match = self._inverse.fullmatch(rendered)
        return match.groupdict() if match else None

    def __repr__(self) -> str:
        return f"PromptTemplate({self.name!r}, slots={self.slots})"


class PromptTemplates:
    """The full set of prompts used by the pipeline, oracle and judge."""

    def __init__(self, templates: Dict[str, PromptTemplate]):
        """Store templates by name.

        Raises:
            TemplateError: If a required template is missing.
        """
        missing = sorted(set(TEMPLATE_SLOTS) - set(templates))
        if missing:
            raise TemplateError(f"Missing templates: {missing}")
        self._templates = dict(templates)

    def __getitem__(self, name: str) -> PromptTemplate:
        return self._templates[name]

    @property
    def gather(self) -> PromptTemplate:
        return self._templates["gather"]

    @property
    def filter(self) -> PromptTemplate:
        return self._templates["filter"]

    @property
    def merge(self) -> PromptTemplate:
        return self._templates["merge"]

    @property
    def answer(self) -> PromptTemplate:
        return self._templates["answer"]

    @property
    def gather_free(self) -> PromptTemplate:
        return self._templates["gather_free"]

    @property
    def filter_free(self) -> PromptTemplate:
        return self._templates["filter_free"]

    @property
    def merge_free(self) -> PromptTemplate:
        return self._templates["merge_free"]

    @property
    def judge(self) -> PromptTemplate:
        return self._templates["judge"]

    @property
    def judge_choice(self) -> PromptTemplate:
        return self._templates["judge_choice"]

    def answer_for(self, task_kind: Optional[str] = None) -> PromptTemplate:
        """Answer template for a task kind, falling back to the generic one."""
        if task_kind:
            return self._templates.get(f"answer_{task_kind}", self.answer)
        return self.answer

    def names(self) -> List[str]:
        """Names of all loaded templates."""
        return sorted(self._templates)


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8").rstrip("\n")


def load_templates(directory: Optional[Path] = None) -> PromptTemplates:
    """Load templates, preferring files in ``directory`` over shipped ones.

    Args:
        directory: Optional directory of ``<name>.txt`` overrides.

    Returns:
        Validated template set.
    """
    templates: Dict[str, PromptTemplate] = {}
    for name, slots in TEMPLATE_SLOTS.items():
        path = PROMPT_DIR / f"{name}.txt"
        if directory is not None and (Path(directory) / f"{name}.txt").exists():
            path = Path(directory) / f"{name}.txt"
            logger.info(f"Using template override {path}")
        templates[name] = PromptTemplate(name, _read(path), slots)

    # Per-task answer prompts: answer_<task_kind>.txt, same slots as answer
    sources = [PROMPT_DIR] + ([Path(directory)] if directory is not None else [])
    for source in sources:
        for path in sorted(source.glob("answer_*.txt")):
            templates[path.stem] = PromptTemplate(path.stem, _read(path), TEMPLATE_SLOTS["answer"])
    return PromptTemplates(templates)


_DEFAULT: Optional[PromptTemplates] = None


def default_templates() -> PromptTemplates:
    """Shipped templates, loaded once."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_templates()
    return _DEFAULT
