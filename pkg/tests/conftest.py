from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from tokenshare.config import PlatformConfig
from tokenshare.core import Platform

EPOCH_START = datetime(2025, 1, 1, tzinfo=timezone.utc)


class FakeClock:
    """Settable clock so event timestamps are deterministic in tests."""

    def __init__(self, start: datetime = EPOCH_START):
        self.now = start

    def __call__(self) -> datetime:
        return self.now

    def set(self, moment: datetime) -> None:
        self.now = moment

    def advance(self, **kwargs) -> None:
        self.now += timedelta(**kwargs)


@pytest.fixture
def clock() -> FakeClock:
    return FakeClock()


@pytest.fixture
def platform(tmp_path, clock):
    plat, admin_token = Platform.initialize(tmp_path / "data", PlatformConfig(), clock=clock)
    plat.admin_token_plain = admin_token  # test convenience only
    yield plat
    plat.close()


def jsonl(*texts: str) -> bytes:
    import json

    return b"\n".join(json.dumps({"text": text}).encode("utf-8") for text in texts)


def words(n: int, prefix: str = "w") -> str:
    """A document of n distinct whitespace-separated tokens.

    Tokens are long enough that any document of four or more of them
    clears the default 32-character minimum length filter.
    """
    return " ".join(f"{prefix}word{i:03d}" for i in range(n))
