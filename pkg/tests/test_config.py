"""Key-value config file parsing and validation."""

from __future__ import annotations

from fractions import Fraction

import pytest

from tokenshare.config import PlatformConfig, load_config, parse_config_text
from tokenshare.errors import ConfigError


GOOD = """
# platform settings
alpha_ppm = 150000
epoch_length_days = 14
currency_code = EUR

min_chars = 10          # filters
max_non_text_ratio = 0.25
repetition_rule = false

shingle_size = 4
num_perms = 64
lsh_bands = 8
lsh_rows_per_band = 8
minhash_seed = 7
jaccard_threshold = 0.75
"""


class TestParse:
    def test_full_round_trip(self):
        config = parse_config_text(GOOD)
        assert config.alpha_ppm == 150_000
        assert config.epoch_length_days == 14
        assert config.currency_code == "EUR"
        assert config.filter_rules.min_chars == 10
        assert config.filter_rules.max_non_text_ratio == Fraction(1, 4)
        assert config.filter_rules.repetition_rule is False
        assert config.minhash.num_perms == 64
        assert config.minhash.seed == 7
        assert config.minhash.jaccard_threshold == Fraction(3, 4)
        # serialization round trip preserves everything
        assert PlatformConfig.from_dict(config.to_dict()) == config

    def test_ratio_thresholds_are_exact_rationals(self):
        config = parse_config_text("max_non_text_ratio = 0.3")
        assert config.filter_rules.max_non_text_ratio == Fraction(3, 10)

    def test_comments_and_blank_lines_ignored(self):
        assert parse_config_text("# nothing\n\n") == PlatformConfig()

    @pytest.mark.parametrize(
        "text",
        [
            "mystery_key = 5",
            "alpha_ppm = lots",
            "alpha_ppm 100000",
            "max_non_text_ratio = huge",
            "repetition_rule = perhaps",
        ],
    )
    def test_malformed_lines_fail_loudly(self, text):
        with pytest.raises(ConfigError):
            parse_config_text(text)

    @pytest.mark.parametrize(
        "text",
        [
            "alpha_ppm = 0",  # active platform needs a positive share
            "alpha_ppm = 1000001",
            "epoch_length_days = 0",
            "currency_code = DOLLARS",
            "min_chars = 2000000",  # >= max_chars
            "max_non_text_ratio = 1.5",
            "num_perms = 100",  # bands * rows != perms
        ],
    )
    def test_semantic_validation(self, text):
        with pytest.raises(ConfigError):
            parse_config_text(text)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "platform.conf"
        path.write_text(GOOD)
        assert load_config(path) == parse_config_text(GOOD)
