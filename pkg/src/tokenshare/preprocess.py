"""Text normalization, token counting, and heuristic quality filters.

Token counts feed directly into payout proportions, so the default
tokenizer is deliberately boring and auditable: the number of maximal runs
of non-whitespace characters (Unicode whitespace per str.split). Alternate
tokenizers plug in by name.
"""

from __future__ import annotations

import re
import string
import unicodedata
from dataclasses import dataclass
from fractions import Fraction
from typing import Protocol

from .errors import ConfigError, InvalidInput

_BLANK_RUN = re.compile(r"\n{4,}")


def normalize(raw_text: str) -> str:
    """Canonicalize text: NFC, newline normalization, whitespace trim.

    Runs of three or more blank lines collapse to two. Idempotent:
    normalize(normalize(x)) == normalize(x).
    """
    text = unicodedata.normalize("NFC", raw_text)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = _BLANK_RUN.sub("\n\n\n", text)
    return text.strip()


class Tokenizer(Protocol):
    name: str

    def count(self, text: str) -> int: ...


class WhitespaceTokenizer:
    """Counts non-empty segments split on runs of Unicode whitespace."""

    name = "whitespace"

    def count(self, text: str) -> int:
        return len(text.split())


_TOKENIZERS: dict[str, Tokenizer] = {"whitespace": WhitespaceTokenizer()}

DEFAULT_TOKENIZER = _TOKENIZERS["whitespace"]


def get_tokenizer(name: str) -> Tokenizer:
    try:
        return _TOKENIZERS[name]
    except KeyError:
        raise ConfigError(f"unknown tokenizer {name!r}; available: {sorted(_TOKENIZERS)}") from None


def register_tokenizer(tokenizer: Tokenizer) -> None:
    _TOKENIZERS[tokenizer.name] = tokenizer


def count_tokens(normalized_text: str, tokenizer: Tokenizer = DEFAULT_TOKENIZER) -> int:
    return tokenizer.count(normalized_text)


# Characters besides letters, digits, and whitespace that ordinary prose may
# contain without counting toward the non-text ratio.
_COMMON_PUNCT = frozenset(string.punctuation) | frozenset("‘’“”–—…«»·")

REASON_TOO_SHORT = "too_short"
REASON_TOO_LONG = "too_long"
REASON_NON_TEXT = "non_text"
REASON_REPETITIVE = "repetitive"


@dataclass(frozen=True)
class FilterRuleSet:
    """Heuristic quality thresholds; each rule can be disabled individually.

    Ratio thresholds are exact rationals so boundary documents compare
    deterministically (a ratio exactly at the threshold passes).
    """

    min_chars: int = 32
    max_chars: int = 1_048_576
    max_non_text_ratio: Fraction = Fraction(3, 10)
    max_repetition_ratio: Fraction = Fraction(1, 2)
    length_rule: bool = True
    non_text_rule: bool = True
    repetition_rule: bool = True

    def __post_init__(self) -> None:
        if self.min_chars < 0 or self.min_chars >= self.max_chars:
            raise InvalidInput("filter rules require 0 <= min_chars < max_chars")
        for name in ("max_non_text_ratio", "max_repetition_ratio"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise InvalidInput(f"{name} must lie in [0, 1]")


def non_text_ratio(text: str) -> Fraction:
    """Share of characters that are not letters, digits, whitespace, or common punctuation."""
    if not text:
        return Fraction(0)
    other = sum(1 for ch in text if not (ch.isalnum() or ch.isspace() or ch in _COMMON_PUNCT))
    return Fraction(other, len(text))


def repetition_ratio(text: str) -> Fraction:
    """Share of non-blank lines that duplicate an earlier line."""
    lines = [line for line in text.split("\n") if line.strip()]
    if not lines:
        return Fraction(0)
    return Fraction(len(lines) - len(set(lines)), len(lines))


def apply_filters(normalized_text: str, rules: FilterRuleSet) -> str | None:
    """Evaluate rules in fixed order (length, non-text, repetition).

    Returns None when the document is accepted, otherwise the identifier of
    the first failing rule.
    """
    if rules.length_rule:
        if len(normalized_text) < rules.min_chars:
            return REASON_TOO_SHORT
        if len(normalized_text) > rules.max_chars:
            return REASON_TOO_LONG
    if rules.non_text_rule and non_text_ratio(normalized_text) > rules.max_non_text_ratio:
        return REASON_NON_TEXT
    if rules.repetition_rule and repetition_ratio(normalized_text) > rules.max_repetition_ratio:
        return REASON_REPETITIVE
    return None
