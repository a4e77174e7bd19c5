"""Runtime configuration: environment, asset paths and config files."""

from .settings import (
    API_BASE_ENV,
    API_KEY_ENV,
    PROMPT_DIR,
    api_base,
    api_key,
    build_config,
    load_config_file,
    parse_config_text,
)

__all__ = [
    "API_BASE_ENV",
    "API_KEY_ENV",
    "PROMPT_DIR",
    "api_base",
    "api_key",
    "build_config",
    "load_config_file",
    "parse_config_text",
]
