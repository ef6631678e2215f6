"""Idempotent ingestion and aggregation of consumer revenue events.

Events arrive from the consumer's billing system with producer-assigned
ids; the first occurrence of an id wins and every replay is a no-op, so
totals are exact regardless of delivery duplication. Closed accounting
periods are immutable: events timestamped before the open epoch are
rejected for manual reconciliation instead of silently back-applied.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

from .canonical import format_ts, parse_ts
from .errors import InvalidInput, RevenueRejected

REJECT_NON_POSITIVE = "non-positive amount"
REJECT_EPOCH_CLOSED = "epoch closed"
REJECT_CURRENCY = "currency mismatch"


@dataclass(frozen=True)
class RevenueEvent:
    event_id: str
    occurred_at: datetime
    amount_minor: int
    usage_meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "occurred_at": format_ts(self.occurred_at),
            "amount_minor": self.amount_minor,
            "usage_meta": self.usage_meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RevenueEvent":
        return cls(
            event_id=data["event_id"],
            occurred_at=parse_ts(data["occurred_at"]),
            amount_minor=data["amount_minor"],
            usage_meta=data.get("usage_meta", {}),
        )


class RevenueStore:
    """Accepted events keyed by id, with windowed exact aggregation."""

    def __init__(self) -> None:
        self._events: dict[str, RevenueEvent] = {}

    def __len__(self) -> int:
        return len(self._events)

    def known(self, event_id: str) -> bool:
        return event_id in self._events

    def validate(self, event: RevenueEvent, closed_before: datetime) -> None:
        """Raise RevenueRejected for events that must not be accepted."""
        if not isinstance(event.amount_minor, int) or event.amount_minor <= 0:
            raise RevenueRejected(REJECT_NON_POSITIVE)
        if event.occurred_at < closed_before:
            raise RevenueRejected(REJECT_EPOCH_CLOSED)

    def ingest(self, event: RevenueEvent, closed_before: datetime) -> str:
        """Returns "accepted" or "duplicate"; raises RevenueRejected otherwise.

        A replayed event_id is a duplicate no matter what payload it
        carries, and changes nothing.
        """
        if event.event_id in self._events:
            return "duplicate"
        self.validate(event, closed_before)
        self._events[event.event_id] = event
        return "accepted"

    def aggregate(self, start: datetime, end: datetime) -> int:
        """Exact sum of accepted amounts with start <= occurred_at < end."""
        if start >= end:
            raise InvalidInput("aggregation window requires start < end")
        return sum(e.amount_minor for e in self._events.values() if start <= e.occurred_at < end)

    def usage_detail(self, start: datetime, end: datetime) -> list[dict]:
        """Per-day buckets (UTC) of amounts and per-endpoint request tallies."""
        if start >= end:
            raise InvalidInput("usage window requires start < end")
        buckets: dict[str, dict] = {}
        for event in self._events.values():
            if not start <= event.occurred_at < end:
                continue
            day = event.occurred_at.astimezone(timezone.utc).date().isoformat()
            bucket = buckets.setdefault(
                day, {"day": day, "amount_minor": 0, "event_count": 0, "endpoints": {}}
            )
            bucket["amount_minor"] += event.amount_minor
            bucket["event_count"] += 1
            endpoint = str(event.usage_meta.get("endpoint", "unknown"))
            per = bucket["endpoints"].setdefault(endpoint, {"request_count": 0, "amount_minor": 0})
            requests = event.usage_meta.get("request_count", 0)
            per["request_count"] += requests if isinstance(requests, int) and requests > 0 else 0
            per["amount_minor"] += event.amount_minor
        return [buckets[day] for day in sorted(buckets)]

    def events(self) -> list[RevenueEvent]:
        return sorted(self._events.values(), key=lambda e: (e.occurred_at, e.event_id))

    def to_records(self) -> list[dict]:
        return [e.to_dict() for e in self.events()]

    @classmethod
    def from_records(cls, records: list[dict]) -> "RevenueStore":
        store = cls()
        for record in records:
            event = RevenueEvent.from_dict(record)
            store._events[event.event_id] = event
        return store
