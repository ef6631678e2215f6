"""Platform core: the event-sourced state machine behind the service.

Every state change is appended to the durable event log before it is
applied in memory, and current state is a pure fold over that log. Replays
therefore reconstruct accounts, the dedup index, revenue totals, and every
payout statement byte-for-byte.

Concurrency contract: one RLock serializes all mutations (single writer);
reads take the same lock and see committed state only. Submission
processing is designed to run on a single worker so that index insertion
order, and with it duplicate priority, stays deterministic.
"""

from __future__ import annotations

import hashlib
import secrets
import threading
from collections import deque
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import payout, storage
from .canonical import dumps, format_ts, parse_ts, ratio_str
from .config import PlatformConfig
from .dedup import DedupIndex, MinHashParams, contributor_source, require_matching_params
from .errors import (
    Conflict,
    EpochNotClosable,
    InvalidInput,
    NoContributions,
    NoParseableRecords,
    PendingEvents,
    RevenueRejected,
    UnknownEntity,
)
from .pipeline import STAGES, parse_jsonl, run_pipeline
from .preprocess import get_tokenizer
from .revenue import REJECT_CURRENCY, RevenueEvent, RevenueStore

ADMIN_PRINCIPAL = "admin"


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


def hash_token(token: str) -> str:
    return hashlib.sha256(token.encode("ascii")).hexdigest()


@dataclass
class ContributorAccount:
    contributor_id: str
    display_name: str
    registered_at: datetime
    token_hash: str
    net_tokens: int = 0


@dataclass
class SubmissionRecord:
    submission_id: str
    contributor_id: str
    received_at: datetime
    size_bytes: int
    status: str = "queued"  # "queued" | "processing" | "finalized" | "failed"
    report: dict | None = None
    error: str | None = None
    finalized_at: datetime | None = None


class Platform:
    """Aggregate root over accounts, submissions, dedup, revenue, and epochs."""

    def __init__(self, data_dir: Path | str, clock: Callable[[], datetime] = _utcnow):
        self.data_dir = Path(data_dir)
        self.clock = clock
        self._lock = threading.RLock()
        self.log: storage.EventLog | None = None
        self.blobs = storage.BlobStore(self.data_dir / "blobs")
        self._submission_dir = self.data_dir / "submissions"
        self._submission_dir.mkdir(parents=True, exist_ok=True)

        self.config = PlatformConfig()
        self.admin_token_hash = ""
        self.contributors: dict[str, ContributorAccount] = {}
        self.token_index: dict[str, str] = {}  # token hash -> principal id
        self.submissions: dict[str, SubmissionRecord] = {}
        self.submission_order: list[str] = []
        self.index = DedupIndex(self.config.minhash)
        self.revenue = RevenueStore()
        self.epochs: dict[int, payout.PayoutEpoch] = {}
        self.open_epoch_id = 0
        self._pending: deque[str] = deque()
        self._statements: dict[int, str] = {}

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def initialize(
        cls,
        data_dir: Path | str,
        config: PlatformConfig | None = None,
        clock: Callable[[], datetime] = _utcnow,
    ) -> tuple["Platform", str]:
        """Create a fresh platform; returns it plus the one-time admin token."""
        platform = cls(data_dir, clock)
        log_path = platform.data_dir / "events.log"
        if log_path.exists() and log_path.stat().st_size > 0:
            raise Conflict(f"{log_path} already contains an event log")
        platform.log = storage.EventLog(log_path)
        admin_token = secrets.token_hex(16)
        now = platform.clock()
        platform._commit(
            "platform_init",
            {
                "config": (config or PlatformConfig()).to_dict(),
                "admin_token_hash": hash_token(admin_token),
                "genesis_start": format_ts(now),
            },
            now,
        )
        return platform, admin_token

    @classmethod
    def open(cls, data_dir: Path | str, clock: Callable[[], datetime] = _utcnow) -> "Platform":
        """Rebuild state by replaying the event log from the beginning."""
        platform = cls(data_dir, clock)
        platform.log = storage.EventLog(platform.data_dir / "events.log")
        for record in platform.log.records():
            platform._apply(record["kind"], record["data"])
        platform._requeue_unfinished()
        return platform

    @classmethod
    def open_from_snapshot(
        cls,
        data_dir: Path | str,
        snapshot_path: Path | str,
        clock: Callable[[], datetime] = _utcnow,
    ) -> "Platform":
        """Restore a snapshot, then replay only the log tail after it."""
        last_seq, state = storage.read_snapshot(snapshot_path)
        platform = cls(data_dir, clock)
        platform.log = storage.EventLog(platform.data_dir / "events.log")
        platform._load_state(state)
        for record in platform.log.records(from_seq=last_seq + 1):
            platform._apply(record["kind"], record["data"])
        platform._requeue_unfinished()
        return platform

    def write_snapshot(self, path: Path | str) -> None:
        with self._lock:
            storage.write_snapshot(path, self.log.last_seq, self.state_to_dict())

    def close(self) -> None:
        if self.log is not None:
            self.log.close()

    def _requeue_unfinished(self) -> None:
        for sid in self.submission_order:
            if self.submissions[sid].status == "queued":
                self._pending.append(sid)

    # -- event plumbing -----------------------------------------------------

    def _commit(self, kind: str, data: dict, at: datetime) -> None:
        """Append to the log, then fold into memory. Callers hold the lock."""
        self.log.append(kind, data, format_ts(at))
        self._apply(kind, data)

    def _apply(self, kind: str, data: dict) -> None:
        handler = getattr(self, f"_apply_{kind}", None)
        if handler is None:
            raise InvalidInput(f"unknown event kind {kind!r}")
        handler(data)

    def _apply_platform_init(self, data: dict) -> None:
        self.config = PlatformConfig.from_dict(data["config"])
        self.admin_token_hash = data["admin_token_hash"]
        self.token_index = {self.admin_token_hash: ADMIN_PRINCIPAL}
        self.index = DedupIndex(self.config.minhash)
        start = parse_ts(data["genesis_start"])
        self.epochs = {1: self._new_epoch(1, start)}
        self.open_epoch_id = 1

    def _new_epoch(self, epoch_id: int, start: datetime) -> payout.PayoutEpoch:
        return payout.PayoutEpoch(
            epoch_id=epoch_id,
            period_start=start,
            period_end=start + timedelta(days=self.config.epoch_length_days),
            alpha_ppm=self.config.alpha_ppm,
        )

    def _apply_contributor_registered(self, data: dict) -> None:
        account = ContributorAccount(
            contributor_id=data["contributor_id"],
            display_name=data["display_name"],
            registered_at=parse_ts(data["registered_at"]),
            token_hash=data["token_hash"],
        )
        self.contributors[account.contributor_id] = account
        self.token_index[account.token_hash] = account.contributor_id

    def _apply_submission_received(self, data: dict) -> None:
        record = SubmissionRecord(
            submission_id=data["submission_id"],
            contributor_id=data["contributor_id"],
            received_at=parse_ts(data["received_at"]),
            size_bytes=data["size_bytes"],
        )
        self.submissions[record.submission_id] = record
        self.submission_order.append(record.submission_id)

    def _apply_submission_finalized(self, data: dict) -> None:
        record = self.submissions[data["submission_id"]]
        record.status = "finalized"
        record.report = data["report"]
        record.finalized_at = parse_ts(data["finalized_at"])
        first_seen = data["finalized_at"]
        source = contributor_source(record.contributor_id)
        for doc in data["accepted"]:
            self.index.insert(doc["digest"], tuple(doc["signature"]), source, first_seen)
        self.contributors[record.contributor_id].net_tokens += data["report"]["accepted_tokens"]

    def _apply_submission_failed(self, data: dict) -> None:
        record = self.submissions[data["submission_id"]]
        record.status = "failed"
        record.error = data["reason"]
        record.finalized_at = parse_ts(data["finalized_at"])

    def _apply_corpus_loaded(self, data: dict) -> None:
        for entry in data["entries"]:
            self.index.insert(entry["digest"], tuple(entry["signature"]), data["source"], data["loaded_at"])

    def _apply_revenue_ingested(self, data: dict) -> None:
        event = RevenueEvent.from_dict(data)
        self.revenue.ingest(event, closed_before=self.epochs[self.open_epoch_id].period_start)

    def _apply_alpha_set(self, data: dict) -> None:
        self.config = replace(self.config, alpha_ppm=data["alpha_ppm"])

    def _apply_epoch_closed(self, data: dict) -> None:
        epoch = self.epochs[data["epoch_id"]]
        epoch.status = "closed"
        epoch.closed_at = parse_ts(data["closed_at"])
        epoch.period_end = parse_ts(data["effective_end"])
        epoch.revenue_total_minor = data["revenue_total_minor"]
        epoch.undistributed_minor = data["undistributed_minor"]
        epoch.token_snapshot = dict(data["token_snapshot"])
        epoch.lines = [
            payout.PayoutLine(line["contributor_id"], line["tokens"], line["reward_minor"])
            for line in data["lines"]
        ]
        nxt = data["next"]
        successor = payout.PayoutEpoch(
            epoch_id=nxt["epoch_id"],
            period_start=parse_ts(nxt["period_start"]),
            period_end=parse_ts(nxt["period_end"]),
            alpha_ppm=nxt["alpha_ppm"],
        )
        self.epochs[successor.epoch_id] = successor
        self.open_epoch_id = successor.epoch_id
        self._statements.pop(data["epoch_id"], None)

    # -- contributors ---------------------------------------------------------

    def register_contributor(self, display_name: str) -> tuple[str, str]:
        name = display_name.strip()
        if not name:
            raise InvalidInput("display name must not be empty")
        with self._lock:
            if any(acc.display_name == name for acc in self.contributors.values()):
                raise Conflict(f"display name {name!r} already registered")
            contributor_id = "c" + secrets.token_hex(5)
            while contributor_id in self.contributors:
                contributor_id = "c" + secrets.token_hex(5)
            token = secrets.token_hex(16)
            now = self.clock()
            self._commit(
                "contributor_registered",
                {
                    "contributor_id": contributor_id,
                    "display_name": name,
                    "registered_at": format_ts(now),
                    "token_hash": hash_token(token),
                },
                now,
            )
            return contributor_id, token

    def principal_for_token(self, token: str) -> str | None:
        with self._lock:
            return self.token_index.get(hash_token(token))

    # -- submissions ----------------------------------------------------------

    def receive_submission(self, contributor_id: str, data: bytes) -> str:
        if len(data) > self.config.submission_size_cap:
            raise InvalidInput("submission exceeds the configured size cap")
        with self._lock:
            if contributor_id not in self.contributors:
                raise UnknownEntity(f"unknown contributor {contributor_id!r}")
            submission_id = "s" + secrets.token_hex(5)
            while submission_id in self.submissions:
                submission_id = "s" + secrets.token_hex(5)
            (self._submission_dir / f"{submission_id}.jsonl").write_bytes(data)
            now = self.clock()
            self._commit(
                "submission_received",
                {
                    "submission_id": submission_id,
                    "contributor_id": contributor_id,
                    "received_at": format_ts(now),
                    "size_bytes": len(data),
                },
                now,
            )
            self._pending.append(submission_id)
            return submission_id

    def pending_count(self) -> int:
        with self._lock:
            processing = sum(1 for s in self.submissions.values() if s.status == "processing")
            return len(self._pending) + processing

    def take_pending(self) -> str | None:
        with self._lock:
            return self._pending.popleft() if self._pending else None

    def process_submission(self, submission_id: str) -> None:
        """Run the funnel and commit the result atomically (all-or-nothing credit)."""
        with self._lock:
            record = self.submissions.get(submission_id)
            if record is None:
                raise UnknownEntity(f"unknown submission {submission_id!r}")
            if record.status not in ("queued", "processing"):
                return
            record.status = "processing"
            raw = (self._submission_dir / f"{submission_id}.jsonl").read_bytes()
            now = self.clock()
            try:
                report, accepted = run_pipeline(
                    submission_id,
                    record.contributor_id,
                    parse_jsonl(raw),
                    self.config.filter_rules,
                    self.index,
                    get_tokenizer(self.config.tokenizer),
                )
            except NoParseableRecords:
                self._commit(
                    "submission_failed",
                    {
                        "submission_id": submission_id,
                        "finalized_at": format_ts(now),
                        "reason": "no parseable records",
                    },
                    now,
                )
                return
            for doc in accepted:
                self.blobs.put(doc.digest, doc.normalized_text)
            self._commit(
                "submission_finalized",
                {
                    "submission_id": submission_id,
                    "finalized_at": format_ts(now),
                    "report": report.to_dict(),
                    "accepted": [
                        {"digest": doc.digest, "signature": list(doc.signature), "tokens": doc.token_count}
                        for doc in accepted
                    ],
                },
                now,
            )

    def process_pending(self) -> int:
        """Drain the queue synchronously; returns how many submissions ran."""
        count = 0
        while True:
            sid = self.take_pending()
            if sid is None:
                return count
            self.process_submission(sid)
            count += 1

    def submission_report(self, submission_id: str) -> dict:
        """Report for any submission; unfinished stages are marked pending."""
        with self._lock:
            record = self.submissions.get(submission_id)
            if record is None:
                raise UnknownEntity(f"unknown submission {submission_id!r}")
            if record.status == "finalized":
                body = dict(record.report)
            elif record.status == "failed":
                body = {
                    "submission_id": submission_id,
                    "contributor_id": record.contributor_id,
                    "status": "failed",
                    "error": record.error,
                    "stages": [],
                    "rejections": {},
                    "accepted_documents": 0,
                    "accepted_tokens": 0,
                }
            else:
                body = {
                    "submission_id": submission_id,
                    "contributor_id": record.contributor_id,
                    "status": record.status,
                    "stages": [{"stage": stage, "pending": True} for stage in STAGES],
                    "rejections": {},
                    "accepted_documents": 0,
                    "accepted_tokens": 0,
                }
            body["received_at"] = format_ts(record.received_at)
            body["finalized_at"] = format_ts(record.finalized_at) if record.finalized_at else None
            return body

    # -- corpus ---------------------------------------------------------------

    def load_corpus(self, source: str, file_params: MinHashParams, entries: list[tuple[str, tuple[int, ...]]]) -> int:
        if source not in ("consumer_corpus", "public_corpus"):
            raise InvalidInput(f"corpus source must be consumer_corpus or public_corpus, got {source!r}")
        require_matching_params(file_params, self.index.params)
        with self._lock:
            now = self.clock()
            fresh = [
                {"digest": digest, "signature": list(signature)}
                for digest, signature in entries
                if self.index.exact_lookup(digest) is None
            ]
            if fresh:
                self._commit(
                    "corpus_loaded",
                    {"source": source, "loaded_at": format_ts(now), "entries": fresh},
                    now,
                )
            return len(fresh)

    # -- revenue ----------------------------------------------------------------

    def ingest_revenue(self, payload: dict) -> str:
        event = RevenueEvent(
            event_id=str(payload["event_id"]),
            occurred_at=payload["occurred_at"]
            if isinstance(payload["occurred_at"], datetime)
            else parse_ts(payload["occurred_at"]),
            amount_minor=payload["amount_minor"],
            usage_meta=payload.get("usage_meta", {}),
        )
        with self._lock:
            if payload.get("currency", self.config.currency_code) != self.config.currency_code:
                raise RevenueRejected(REJECT_CURRENCY)
            if self.revenue.known(event.event_id):
                return "duplicate"
            self.revenue.validate(event, closed_before=self.epochs[self.open_epoch_id].period_start)
            now = self.clock()
            self._commit("revenue_ingested", event.to_dict(), now)
            return "accepted"

    def aggregate_revenue(self, start: datetime, end: datetime) -> int:
        with self._lock:
            return self.revenue.aggregate(start, end)

    def usage_detail(self, start: datetime, end: datetime) -> list[dict]:
        with self._lock:
            return self.revenue.usage_detail(start, end)

    # -- epochs and payouts -------------------------------------------------------

    def open_epoch(self) -> payout.PayoutEpoch:
        with self._lock:
            return self.epochs[self.open_epoch_id]

    def token_snapshot(self) -> dict[str, int]:
        with self._lock:
            return {cid: acc.net_tokens for cid, acc in sorted(self.contributors.items())}

    def close_epoch(self, epoch_id: int, close_time: datetime, override: bool = False) -> str:
        """Close the open epoch and open its successor; idempotent on replays.

        Returns the canonical statement. Re-closing an already-closed epoch
        returns the stored statement unchanged.
        """
        with self._lock:
            epoch = self.epochs.get(epoch_id)
            if epoch is None:
                raise UnknownEntity(f"unknown epoch {epoch_id}")
            if epoch.status == "closed":
                return self.statement(epoch_id)
            if self.pending_count():
                raise PendingEvents("submissions are still queued; settle them before closing")
            if close_time <= epoch.period_start:
                raise EpochNotClosable("close time must fall after the epoch start")
            if close_time < epoch.period_end and not override:
                raise EpochNotClosable("epoch period has not ended; pass override to close early")

            effective_end = min(epoch.period_end, close_time)
            revenue_total = self.revenue.aggregate(epoch.period_start, effective_end)
            snapshot = self.token_snapshot()
            try:
                lines = payout.compute_rewards(snapshot, revenue_total, epoch.alpha_ppm)
                undistributed = 0
            except NoContributions as exc:
                lines = []
                undistributed = exc.pool_minor
            successor_start = effective_end
            self._commit(
                "epoch_closed",
                {
                    "epoch_id": epoch_id,
                    "closed_at": format_ts(close_time),
                    "effective_end": format_ts(effective_end),
                    "revenue_total_minor": revenue_total,
                    "alpha_ppm": epoch.alpha_ppm,
                    "token_snapshot": snapshot,
                    "lines": [
                        {"contributor_id": l.contributor_id, "tokens": l.tokens, "reward_minor": l.reward_minor}
                        for l in lines
                    ],
                    "undistributed_minor": undistributed,
                    "next": {
                        "epoch_id": epoch_id + 1,
                        "period_start": format_ts(successor_start),
                        "period_end": format_ts(
                            successor_start + timedelta(days=self.config.epoch_length_days)
                        ),
                        "alpha_ppm": self.config.alpha_ppm,
                    },
                },
                close_time,
            )
            return self.statement(epoch_id)

    def statement(self, epoch_id: int) -> str:
        """Canonical statement JSON for a closed epoch; byte-stable across calls."""
        with self._lock:
            epoch = self.epochs.get(epoch_id)
            if epoch is None:
                raise UnknownEntity(f"unknown epoch {epoch_id}")
            if epoch.status != "closed":
                raise EpochNotClosable(f"epoch {epoch_id} is still open")
            if epoch_id not in self._statements:
                self._statements[epoch_id] = dumps(payout.epoch_statement(epoch, self.config.currency_code))
            return self._statements[epoch_id]

    def statement_for(self, epoch_id: int, contributor_id: str) -> str:
        """Statement restricted to one contributor's lines (reader isolation)."""
        with self._lock:
            epoch = self.epochs.get(epoch_id)
            if epoch is None:
                raise UnknownEntity(f"unknown epoch {epoch_id}")
            if epoch.status != "closed":
                raise EpochNotClosable(f"epoch {epoch_id} is still open")
            body = payout.epoch_statement(epoch, self.config.currency_code)
            body["lines"] = [line for line in body["lines"] if line["contributor_id"] == contributor_id]
            return dumps(body)

    def set_alpha(self, alpha_ppm: int) -> None:
        """Update the revenue share applied to epochs opened from now on."""
        if not isinstance(alpha_ppm, int) or not 0 < alpha_ppm <= payout.PPM:
            raise InvalidInput("alpha_ppm must lie in (0, 1_000_000]")
        with self._lock:
            now = self.clock()
            self._commit("alpha_set", {"alpha_ppm": alpha_ppm, "set_at": format_ts(now)}, now)

    # -- metrics ------------------------------------------------------------------

    def forecast(self, as_of: datetime) -> payout.ForecastEstimate:
        with self._lock:
            epoch = self.epochs[self.open_epoch_id]
            if as_of < epoch.period_start:
                raise InvalidInput("forecast time precedes the open epoch")
            clamped = min(as_of, epoch.period_end)
            accrued = (
                self.revenue.aggregate(epoch.period_start, clamped)
                if clamped > epoch.period_start
                else 0
            )
            return payout.expected_payout(clamped, epoch, accrued, self.token_snapshot(), epoch.alpha_ppm)

    def metrics_view(self, contributor_id: str, as_of: datetime | None = None) -> dict:
        """The four dashboard figures for one contributor."""
        with self._lock:
            if contributor_id not in self.contributors:
                raise UnknownEntity(f"unknown contributor {contributor_id!r}")
            as_of = as_of or self.clock()
            snapshot = self.token_snapshot()
            total = sum(snapshot.values())
            ratio = Fraction(0) if total == 0 else payout.contribution_ratio(contributor_id, snapshot)
            current = 0
            closed_ids = [eid for eid, ep in self.epochs.items() if ep.status == "closed"]
            if closed_ids:
                last = self.epochs[max(closed_ids)]
                current = next(
                    (l.reward_minor for l in last.lines if l.contributor_id == contributor_id), 0
                )
            estimate = self.forecast(as_of)
            return {
                "contribution_ratio": ratio_str(ratio),
                "contribution_token_count": snapshot[contributor_id],
                "current_monetary_reward_minor": current,
                "expected_payout_minor": estimate.expected_payout_minor.get(contributor_id, 0),
            }

    # -- state serialization ---------------------------------------------------------

    def state_to_dict(self) -> dict:
        """Full platform state as canonical-JSON-serializable data.

        Transient "processing" marks are recorded as "queued": a submission
        is durably queued until its finalized event lands.
        """
        with self._lock:
            return {
                "config": self.config.to_dict(),
                "admin_token_hash": self.admin_token_hash,
                "contributors": [
                    {
                        "contributor_id": acc.contributor_id,
                        "display_name": acc.display_name,
                        "registered_at": format_ts(acc.registered_at),
                        "token_hash": acc.token_hash,
                        "net_tokens": acc.net_tokens,
                    }
                    for _, acc in sorted(self.contributors.items())
                ],
                "submissions": [
                    {
                        "submission_id": rec.submission_id,
                        "contributor_id": rec.contributor_id,
                        "received_at": format_ts(rec.received_at),
                        "size_bytes": rec.size_bytes,
                        "status": "queued" if rec.status == "processing" else rec.status,
                        "report": rec.report,
                        "error": rec.error,
                        "finalized_at": format_ts(rec.finalized_at) if rec.finalized_at else None,
                    }
                    for rec in (self.submissions[sid] for sid in self.submission_order)
                ],
                "index": self.index.to_records(),
                "revenue": self.revenue.to_records(),
                "epochs": [self._epoch_to_dict(self.epochs[eid]) for eid in sorted(self.epochs)],
                "open_epoch_id": self.open_epoch_id,
            }

    @staticmethod
    def _epoch_to_dict(epoch: payout.PayoutEpoch) -> dict:
        return {
            "epoch_id": epoch.epoch_id,
            "period_start": format_ts(epoch.period_start),
            "period_end": format_ts(epoch.period_end),
            "alpha_ppm": epoch.alpha_ppm,
            "status": epoch.status,
            "closed_at": format_ts(epoch.closed_at) if epoch.closed_at else None,
            "revenue_total_minor": epoch.revenue_total_minor,
            "undistributed_minor": epoch.undistributed_minor,
            "token_snapshot": epoch.token_snapshot,
            "lines": [
                {"contributor_id": l.contributor_id, "tokens": l.tokens, "reward_minor": l.reward_minor}
                for l in epoch.lines
            ],
        }

    def _load_state(self, state: dict) -> None:
        self.config = PlatformConfig.from_dict(state["config"])
        self.admin_token_hash = state["admin_token_hash"]
        self.token_index = {self.admin_token_hash: ADMIN_PRINCIPAL}
        self.contributors = {}
        for data in state["contributors"]:
            account = ContributorAccount(
                contributor_id=data["contributor_id"],
                display_name=data["display_name"],
                registered_at=parse_ts(data["registered_at"]),
                token_hash=data["token_hash"],
                net_tokens=data["net_tokens"],
            )
            self.contributors[account.contributor_id] = account
            self.token_index[account.token_hash] = account.contributor_id
        self.submissions = {}
        self.submission_order = []
        for data in state["submissions"]:
            record = SubmissionRecord(
                submission_id=data["submission_id"],
                contributor_id=data["contributor_id"],
                received_at=parse_ts(data["received_at"]),
                size_bytes=data["size_bytes"],
                status=data["status"],
                report=data["report"],
                error=data["error"],
                finalized_at=parse_ts(data["finalized_at"]) if data["finalized_at"] else None,
            )
            self.submissions[record.submission_id] = record
            self.submission_order.append(record.submission_id)
        self.index = DedupIndex.from_records(self.config.minhash, state["index"])
        self.revenue = RevenueStore.from_records(state["revenue"])
        self.epochs = {}
        for data in state["epochs"]:
            epoch = payout.PayoutEpoch(
                epoch_id=data["epoch_id"],
                period_start=parse_ts(data["period_start"]),
                period_end=parse_ts(data["period_end"]),
                alpha_ppm=data["alpha_ppm"],
                status=data["status"],
                closed_at=parse_ts(data["closed_at"]) if data["closed_at"] else None,
                revenue_total_minor=data["revenue_total_minor"],
                undistributed_minor=data["undistributed_minor"],
                token_snapshot=dict(data["token_snapshot"]),
                lines=[
                    payout.PayoutLine(l["contributor_id"], l["tokens"], l["reward_minor"])
                    for l in data["lines"]
                ],
            )
            self.epochs[epoch.epoch_id] = epoch
        self.open_epoch_id = state["open_epoch_id"]
        self._statements = {}

    def state_digest(self) -> str:
        """Hash of the canonical state dump; equal digests mean equal state."""
        return hashlib.sha256(dumps(self.state_to_dict()).encode("ascii")).hexdigest()
