"""Answer normalization, exact match and token F1."""

import re
import string
from collections import Counter
from typing import Callable, Sequence

Normalizer = Callable[[str], str]

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCTUATION = set(string.punctuation)


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation, drop articles and collapse whitespace."""
    text = text.lower()
    text = "".join(ch for ch in text if ch not in _PUNCTUATION)
    text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def exact_match(pred: str, gold: str, normalizer: Normalizer = normalize_answer) -> int:
    """1 if the normalized strings are equal, else 0."""
    return int(normalizer(pred) == normalizer(gold))


def token_f1(pred: str, gold: str, normalizer: Normalizer = normalize_answer) -> float:
    """Harmonic mean of token precision and recall over normalized tokens.

    Tokens are compared as multisets. Two empty answers score 1.0; exactly one
    empty answer scores 0.0.
    """
    pred_tokens = normalizer(pred).split()
    gold_tokens = normalizer(gold).split()
    if not pred_tokens and not gold_tokens:
        return 1.0
    if not pred_tokens or not gold_tokens:
        return 0.0
    common = Counter(pred_tokens) & Counter(gold_tokens)
    num_same = sum(common.values())
    if num_same == 0:
        return 0.0
    precision = num_same / len(pred_tokens)
    recall = num_same / len(gold_tokens)
    return (2 * precision * recall) / (precision + recall)


def best_over_golds(
    metric: Callable[..., float],
    pred: str,
    golds: Sequence[str],
    normalizer: Normalizer = normalize_answer,
) -> float:
    """Best score of ``pred`` against any of several reference answers."""
    if not golds:
        return float(metric(pred, "", normalizer))
    return max(float(metric(pred, g, normalizer)) for g in golds)
