"""Backend request and response models."""

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .enums import Stage


class GenerationParams(BaseModel):
    """Sampling parameters for one backend call."""

    model_config = ConfigDict(frozen=True)

    temperature: float = Field(0.0, ge=0.0, description="Sampling temperature")
    max_output_tokens: int = Field(1024, ge=1, description="Completion token cap")


class BackendRequest(BaseModel):
    """A stage-tagged prompt sent to a language-model backend.

    The stage travels beside the prompt so real prompts stay identical to the
    shipped templates; the HTTP backend ignores it.
    """

    model_config = ConfigDict(frozen=True)

    stage: Stage = Field(..., description="Pipeline stage issuing the request")
    prompt: str = Field(..., description="Rendered prompt")
    params: GenerationParams = Field(default_factory=GenerationParams)

    @field_validator("prompt")
    @classmethod
    def validate_prompt(cls, v: str) -> str:
        """Reject empty prompts."""
        if not v:
            raise ValueError("Prompt must be non-empty")
        return v


class Usage(BaseModel):
    """Token usage reported for one call."""

    model_config = ConfigDict(frozen=True)

    prompt_tokens: int = Field(0, ge=0)
    completion_tokens: int = Field(0, ge=0)


class BackendResponse(BaseModel):
    """Text returned by a backend for one request."""

    model_config = ConfigDict(frozen=True)

    text: str = Field(..., description="Model output")
    usage: Usage = Field(default_factory=Usage)
    attempts: int = Field(1, ge=1, description="Attempts made, including retries")
