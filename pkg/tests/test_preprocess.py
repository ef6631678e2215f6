"""Normalization, token counting, and quality filter behavior."""

from __future__ import annotations

import re
import unicodedata
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tokenshare.errors import ConfigError, InvalidInput
from tokenshare.preprocess import (
    FilterRuleSet,
    apply_filters,
    count_tokens,
    get_tokenizer,
    non_text_ratio,
    normalize,
    repetition_ratio,
)


class TestNormalize:
    def test_crlf_becomes_lf(self):
        assert normalize("a\r\nb") == "a\nb"

    def test_lone_cr_becomes_lf(self):
        assert normalize("a\rb") == "a\nb"

    def test_trim(self):
        assert normalize("  x  ") == "x"

    def test_blank_line_runs_collapse_to_two(self):
        assert normalize("a\n\n\n\n\n\nb") == "a\n\n\nb"
        assert normalize("a\n\n\nb") == "a\n\n\nb"  # two blank lines stay

    def test_nfc_composition(self):
        assert normalize("é") == "é"

    def test_already_normalized_text_is_unchanged(self):
        text = "plain paragraph\nwith two lines"
        assert normalize(text) == text

    @given(st.text(max_size=300))
    def test_idempotency(self, text):
        once = normalize(text)
        assert normalize(once) == once


class TestCountTokens:
    def test_empty(self):
        assert count_tokens("") == 0

    def test_two_segments(self):
        assert count_tokens("hello world") == 2

    def test_non_breaking_space_is_whitespace(self):
        assert count_tokens("a b c") == 3

    def test_unknown_tokenizer(self):
        with pytest.raises(ConfigError):
            get_tokenizer("bpe-9000")

    @given(st.text(max_size=500))
    def test_matches_regex_oracle(self, text):
        # independent scan: maximal runs of non-whitespace characters
        assert count_tokens(text) == len(re.findall(r"\S+", text))

    def test_whitespace_table_oracle(self):
        # every separator below is Unicode whitespace; count transitions by hand
        seps = [" ", " ", " ", "\t", "\n", "\x85"]
        sample = "a" + "".join(sep + "b" for sep in seps)
        assert count_tokens(sample) == 1 + len(seps)
        for sep in seps:
            assert unicodedata.category(sep).startswith("Z") or sep.isspace()


def prose(n_sentences: int = 3) -> str:
    return " ".join(
        f"sentence {i} carries ordinary descriptive words about harbors and lighthouses."
        for i in range(n_sentences)
    )


class TestFilters:
    def test_too_short(self):
        assert apply_filters("ten chars.", FilterRuleSet()) == "too_short"

    def test_too_long(self):
        rules = FilterRuleSet(min_chars=1, max_chars=10)
        assert apply_filters("x" * 11, rules) == "too_long"

    def test_repetitive_hundred_identical_lines(self):
        text = "\n".join(["this exact line repeats"] * 100)
        assert repetition_ratio(text) == Fraction(99, 100)
        assert apply_filters(text, FilterRuleSet()) == "repetitive"

    def test_ordinary_prose_accepted(self):
        assert apply_filters(prose(), FilterRuleSet()) is None

    def test_non_text_rejection(self):
        noisy = "data " + "☃❤★" * 20  # symbols, not letters
        assert apply_filters(noisy, FilterRuleSet(min_chars=1)) == "non_text"

    def test_ratio_exactly_at_threshold_passes(self):
        # 3 of 10 chars are symbols: ratio == 3/10 == threshold, not above it
        text = "abcdefg" + "☃" * 3
        assert non_text_ratio(text) == Fraction(3, 10)
        assert apply_filters(text, FilterRuleSet(min_chars=1)) is None

    def test_rule_order_is_length_first(self):
        # fails both length and repetition; length wins
        text = "x\nx"
        assert apply_filters(text, FilterRuleSet()) == "too_short"

    def test_disabled_rules_do_not_fire(self):
        rules = FilterRuleSet(length_rule=False, non_text_rule=False, repetition_rule=False)
        assert apply_filters("x", rules) is None
        assert apply_filters("\n".join(["dup"] * 50), rules) is None

    def test_blank_lines_do_not_count_as_repetition(self):
        text = "alpha\n\n\nbeta\n\n\ngamma"
        assert repetition_ratio(text) == 0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"min_chars": 100, "max_chars": 50},
            {"max_non_text_ratio": Fraction(3, 2)},
            {"max_repetition_ratio": Fraction(-1, 2)},
        ],
    )
    def test_threshold_validation(self, kwargs):
        with pytest.raises(InvalidInput):
            FilterRuleSet(**kwargs)

    @given(st.text(max_size=2000))
    def test_filters_are_total_and_pure(self, text):
        rules = FilterRuleSet()
        normalized = normalize(text)
        assert apply_filters(normalized, rules) == apply_filters(normalized, rules)
