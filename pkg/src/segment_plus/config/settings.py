"""Global configuration settings."""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

from segment_plus.models import EvidenceMerge, PipelineConfig, PipelineMode
from segment_plus.utils import ConfigInvalid

logger = logging.getLogger(__name__)

# Package root directory
PACKAGE_ROOT = Path(__file__).parent.parent

# Shipped prompt templates
PROMPT_DIR = PACKAGE_ROOT / "pipeline" / "prompts"

# Environment variables read by the HTTP backend
API_KEY_ENV = "SEGPLUS_API_KEY"
API_BASE_ENV = "SEGPLUS_API_BASE"
DEFAULT_API_BASE = "https://api.openai.com/v1"


def api_key() -> Optional[str]:
    """Bearer credential from the environment, if set."""
    value = os.environ.get(API_KEY_ENV, "").strip()
    return value or None


def api_base() -> str:
    """Chat-completions base URL from the environment or the default."""
    return os.environ.get(API_BASE_ENV, "").strip() or DEFAULT_API_BASE


def _coerce(field: str, raw: str) -> Any:
    annotation = PipelineConfig.model_fields[field].annotation
    try:
        if annotation is int:
            return int(raw)
        if annotation is float:
            return float(raw)
        if annotation is PipelineMode:
            return PipelineMode(raw.lower())
        if annotation is EvidenceMerge:
            return EvidenceMerge(raw.lower())
    except ValueError as e:
        raise ConfigInvalid(field, f"{field}: cannot parse {raw!r}") from e
    return raw


def parse_config_text(text: str) -> Dict[str, Any]:
    """Parse the flat ``key = value`` config format.

    Blank lines and ``#`` comments are ignored; dashes in keys are accepted
    in place of underscores.

    Args:
        text: Config file contents.

    Returns:
        Mapping of PipelineConfig field names to typed values.

    Raises:
        ConfigInvalid: On unknown keys or unparseable values.
    """
    values: Dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid("config", f"line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in PipelineConfig.model_fields:
            raise ConfigInvalid(key, f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def load_config_file(path: Path) -> Dict[str, Any]:
    """Read a flat config file into PipelineConfig overrides."""
    logger.debug(f"Loading config file {path}")
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def build_config(
    file_values: Optional[Dict[str, Any]] = None,
    flag_values: Optional[Dict[str, Any]] = None,
) -> PipelineConfig:
    """Merge overrides with precedence flags > config file > defaults."""
    merged: Dict[str, Any] = dict(file_values or {})
    merged.update({k: v for k, v in (flag_values or {}).items() if v is not None})
    return PipelineConfig(**merged)
