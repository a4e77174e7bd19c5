"""Backend abstraction layer for live and scripted language models."""

from .abstract import AbstractBackend
from .oracle import OracleBackend, ScriptedBackend, oracle_answer_rule
from .remote import HttpBackend

__all__ = [
    "AbstractBackend",
    "OracleBackend",
    "ScriptedBackend",
    "oracle_answer_rule",
    "HttpBackend",
]
