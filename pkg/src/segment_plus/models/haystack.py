"""Models for needle-in-a-haystack tasks and the oracle registry."""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .enums import TaskKind

HAYSTACK_LENGTHS = (0, 4096, 8192, 16384, 32768, 65536, 131072)


class HaystackTask(BaseModel):
    """Needle facts, question and placement plan for one synthetic QA item."""

    model_config = ConfigDict(frozen=True)

    task_id: str = Field(..., description="Stable identifier")
    kind: TaskKind = Field(..., description="Number of chained facts")
    facts: List[str] = Field(..., min_length=1, description="Needle sentences in document order")
    question: str = Field(..., description="Question over the facts")
    gold_answer: str = Field(..., description="Single-word answer")
    required_facts: List[int] = Field(..., min_length=1, description="Facts needed to answer")
    target_tokens: int = Field(0, description="Haystack length; 0 means facts only")
    depths: List[float] = Field(..., description="Fractional position of each fact")
    seed: int = Field(0, description="Seed the task was generated with")
    document_path: Optional[str] = Field(None, description="Document file, relative to the suite")

    @model_validator(mode="after")
    def _check_plan(self) -> "HaystackTask":
        if self.target_tokens not in HAYSTACK_LENGTHS:
            raise ValueError(f"target_tokens must be one of {HAYSTACK_LENGTHS}")
        if len(self.depths) != len(self.facts):
            raise ValueError("One depth per fact is required")
        if any(d < 0.0 or d > 1.0 for d in self.depths):
            raise ValueError("Depths must lie in [0, 1]")
        if list(self.depths) != sorted(self.depths):
            raise ValueError("Depths must be sorted ascending")
        if any(i < 0 or i >= len(self.facts) for i in self.required_facts):
            raise ValueError("required_facts index out of range")
        return self


class OracleRegistry(BaseModel):
    """Facts the scripted oracle recognises, and the answer they imply."""

    model_config = ConfigDict(frozen=True)

    fact_sentences: List[str] = Field(..., description="Known fact sentences, in order")
    gold_answer: str = Field(..., description="Answer returned when all required facts are seen")
    required_facts: List[int] = Field(..., min_length=1, description="Indices needed to answer")

    @model_validator(mode="after")
    def _check_required(self) -> "OracleRegistry":
        if any(i < 0 or i >= len(self.fact_sentences) for i in self.required_facts):
            raise ValueError("required_facts index out of range")
        return self

    @classmethod
    def from_task(cls, task: HaystackTask) -> "OracleRegistry":
        """Build the registry that makes a haystack task solvable."""
        return cls(
            fact_sentences=list(task.facts),
            gold_answer=task.gold_answer,
            required_facts=list(task.required_facts),
        )

    @property
    def required_sentences(self) -> List[str]:
        """Fact sentences needed for the gold answer."""
        return [self.fact_sentences[i] for i in self.required_facts]
