"""Canonical JSON and timestamp helpers.

Every persisted or served document (payout statements, stage reports, log
records) serializes with sorted keys, compact separators, and ASCII escapes
so identical data always yields identical bytes. Money is always an integer
count of minor currency units; exact rationals render as decimal strings.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from fractions import Fraction

RATIO_DECIMALS = 6


def dumps(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def dump_bytes(obj: object) -> bytes:
    return dumps(obj).encode("ascii")


def ratio_str(value: Fraction) -> str:
    """Render a non-negative rational as a decimal string.

    At most six fractional digits, rounded half-to-even, trailing zeros
    stripped: 1/4 -> "0.25", 2/3 -> "0.666667", 1 -> "1".
    """
    if value < 0:
        raise ValueError("ratio must be non-negative")
    scaled = value * 10**RATIO_DECIMALS
    units, rem = divmod(scaled.numerator, scaled.denominator)
    if 2 * rem > scaled.denominator or (2 * rem == scaled.denominator and units % 2 == 1):
        units += 1
    text = f"{units:0{RATIO_DECIMALS + 1}d}"
    whole, frac = text[: -RATIO_DECIMALS], text[-RATIO_DECIMALS:]
    frac = frac.rstrip("0")
    return whole if not frac else f"{whole}.{frac}"


def format_ts(dt: datetime) -> str:
    """RFC 3339 UTC timestamp; microseconds included only when present."""
    if dt.tzinfo is None:
        raise ValueError("naive datetime not allowed")
    dt = dt.astimezone(timezone.utc)
    if dt.microsecond:
        return dt.strftime("%Y-%m-%dT%H:%M:%S.%f") + "Z"
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_ts(text: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp missing timezone: {text!r}")
    return dt.astimezone(timezone.utc)
