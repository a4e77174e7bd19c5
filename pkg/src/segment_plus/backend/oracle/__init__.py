"""Scripted oracle backend."""

from .oracle_backend import OracleBackend, ScriptedBackend, oracle_answer_rule

__all__ = ["OracleBackend", "ScriptedBackend", "oracle_answer_rule"]
