"""Platform configuration and the plain-text key-value config format.

Ratio thresholds are parsed from decimal strings into exact rationals so
that threshold comparisons never depend on binary float rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .dedup import MinHashParams
from .errors import ConfigError, InvalidInput
from .payout import PPM
from .preprocess import FilterRuleSet

DEFAULT_SUBMISSION_CAP = 1 << 30  # 1 GiB


@dataclass(frozen=True)
class PlatformConfig:
    alpha_ppm: int = 100_000
    epoch_length_days: int = 30
    currency_code: str = "USD"
    tokenizer: str = "whitespace"
    submission_size_cap: int = DEFAULT_SUBMISSION_CAP
    filter_rules: FilterRuleSet = field(default_factory=FilterRuleSet)
    minhash: MinHashParams = field(default_factory=MinHashParams)

    def __post_init__(self) -> None:
        if not 0 < self.alpha_ppm <= PPM:
            raise InvalidInput("alpha_ppm must lie in (0, 1_000_000] for an active platform")
        if self.epoch_length_days <= 0:
            raise InvalidInput("epoch_length_days must be positive")
        if len(self.currency_code) != 3 or not self.currency_code.isalpha():
            raise InvalidInput("currency_code must be a three-letter ISO 4217 code")
        if self.submission_size_cap <= 0:
            raise InvalidInput("submission_size_cap must be positive")

    def to_dict(self) -> dict:
        return {
            "alpha_ppm": self.alpha_ppm,
            "epoch_length_days": self.epoch_length_days,
            "currency_code": self.currency_code,
            "tokenizer": self.tokenizer,
            "submission_size_cap": self.submission_size_cap,
            "filter_rules": {
                "min_chars": self.filter_rules.min_chars,
                "max_chars": self.filter_rules.max_chars,
                "max_non_text_ratio": str(self.filter_rules.max_non_text_ratio),
                "max_repetition_ratio": str(self.filter_rules.max_repetition_ratio),
                "length_rule": self.filter_rules.length_rule,
                "non_text_rule": self.filter_rules.non_text_rule,
                "repetition_rule": self.filter_rules.repetition_rule,
            },
            "minhash": {
                "shingle_size": self.minhash.shingle_size,
                "num_perms": self.minhash.num_perms,
                "bands": self.minhash.bands,
                "rows_per_band": self.minhash.rows_per_band,
                "seed": self.minhash.seed,
                "jaccard_threshold": str(self.minhash.jaccard_threshold),
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlatformConfig":
        rules = data.get("filter_rules", {})
        mh = data.get("minhash", {})
        return cls(
            alpha_ppm=data.get("alpha_ppm", 100_000),
            epoch_length_days=data.get("epoch_length_days", 30),
            currency_code=data.get("currency_code", "USD"),
            tokenizer=data.get("tokenizer", "whitespace"),
            submission_size_cap=data.get("submission_size_cap", DEFAULT_SUBMISSION_CAP),
            filter_rules=FilterRuleSet(
                min_chars=rules.get("min_chars", 32),
                max_chars=rules.get("max_chars", 1_048_576),
                max_non_text_ratio=_ratio(rules.get("max_non_text_ratio", "0.3")),
                max_repetition_ratio=_ratio(rules.get("max_repetition_ratio", "0.5")),
                length_rule=rules.get("length_rule", True),
                non_text_rule=rules.get("non_text_rule", True),
                repetition_rule=rules.get("repetition_rule", True),
            ),
            minhash=MinHashParams(
                shingle_size=mh.get("shingle_size", 5),
                num_perms=mh.get("num_perms", 128),
                bands=mh.get("bands", 16),
                rows_per_band=mh.get("rows_per_band", 8),
                seed=mh.get("seed", 1),
                jaccard_threshold=_ratio(mh.get("jaccard_threshold", "0.8")),
            ),
        )


def _ratio(text: str) -> Fraction:
    try:
        value = Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad ratio value {text!r}") from exc
    return value


_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}

_KEYS = {
    "alpha_ppm": ("alpha_ppm", int),
    "epoch_length_days": ("epoch_length_days", int),
    "currency_code": ("currency_code", str),
    "tokenizer": ("tokenizer", str),
    "submission_size_cap": ("submission_size_cap", int),
    "min_chars": ("filter_rules.min_chars", int),
    "max_chars": ("filter_rules.max_chars", int),
    "max_non_text_ratio": ("filter_rules.max_non_text_ratio", str),
    "max_repetition_ratio": ("filter_rules.max_repetition_ratio", str),
    "length_rule": ("filter_rules.length_rule", "bool"),
    "non_text_rule": ("filter_rules.non_text_rule", "bool"),
    "repetition_rule": ("filter_rules.repetition_rule", "bool"),
    "shingle_size": ("minhash.shingle_size", int),
    "num_perms": ("minhash.num_perms", int),
    "lsh_bands": ("minhash.bands", int),
    "lsh_rows_per_band": ("minhash.rows_per_band", int),
    "minhash_seed": ("minhash.seed", int),
    "jaccard_threshold": ("minhash.jaccard_threshold", str),
}


def parse_config_text(text: str) -> PlatformConfig:
    """Parse `key = value` lines; '#' starts a comment; unknown keys fail loudly."""
    data: dict = {"filter_rules": {}, "minhash": {}}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        target, converter = _KEYS[key]
        try:
            parsed = _BOOL[value.lower()] if converter == "bool" else converter(value)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
        if "." in target:
            section, name = target.split(".")
            data[section][name] = parsed
        else:
            data[target] = parsed
    try:
        return PlatformConfig.from_dict(data)
    except InvalidInput as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: Path | str) -> PlatformConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))
