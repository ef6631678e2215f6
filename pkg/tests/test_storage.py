"""Event log durability, replay determinism, and snapshot equivalence."""

from __future__ import annotations

import json
from datetime import timedelta

import pytest

from tokenshare.config import PlatformConfig
from tokenshare.core import Platform
from tokenshare.errors import LogCorruption, SnapshotVersionMismatch
from tokenshare.storage import BlobStore, EventLog, read_snapshot, write_snapshot

from conftest import EPOCH_START, FakeClock, jsonl, words


class TestEventLog:
    def test_append_then_read_back(self, tmp_path):
        log = EventLog(tmp_path / "events.log")
        seq = log.append("demo", {"value": 42}, "2025-01-01T00:00:00Z")
        assert seq == 1
        (record,) = list(log.records())
        assert record == {"seq": 1, "kind": "demo", "at": "2025-01-01T00:00:00Z", "data": {"value": 42}}

    def test_sequence_numbers_are_consecutive(self, tmp_path):
        log = EventLog(tmp_path / "events.log")
        assert [log.append("a", {}, "t") for _ in range(5)] == [1, 2, 3, 4, 5]

    def test_reopen_continues_sequence(self, tmp_path):
        path = tmp_path / "events.log"
        log = EventLog(path)
        log.append("a", {}, "t")
        log.close()
        log2 = EventLog(path)
        assert log2.append("b", {}, "t") == 2

    def test_corrupted_checksum_halts_replay(self, tmp_path):
        path = tmp_path / "events.log"
        log = EventLog(path)
        log.append("a", {"k": "payload-to-corrupt"}, "t")
        log.close()
        data = bytearray(path.read_bytes())
        data[20] ^= 0xFF  # flip a payload byte
        path.write_bytes(bytes(data))
        with pytest.raises(LogCorruption):
            list(EventLog(path).records())

    def test_truncated_record_halts_replay(self, tmp_path):
        path = tmp_path / "events.log"
        log = EventLog(path)
        log.append("a", {"k": 1}, "t")
        log.close()
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(LogCorruption):
            list(EventLog(path).records())

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "events.log"
        path.write_bytes(b"XXXX\x00\x01\x00\x00")
        with pytest.raises(LogCorruption):
            list(EventLog(path).records())

    def test_empty_log_replays_to_nothing(self, tmp_path):
        log = EventLog(tmp_path / "events.log")
        assert list(log.records()) == []
        assert log.last_seq == 0


class TestBlobStore:
    def test_put_get_roundtrip(self, tmp_path):
        store = BlobStore(tmp_path / "blobs")
        store.put("ab12cd", "document body")
        assert store.get("ab12cd") == "document body"
        assert store.has("ab12cd")
        store.put("ab12cd", "ignored; content-addressed writes are idempotent")
        assert store.get("ab12cd") == "document body"


def scripted_platform(tmp_path, clock) -> Platform:
    platform, _ = Platform.initialize(tmp_path / "data", PlatformConfig(), clock=clock)
    cid_a, _ = platform.register_contributor("alice")
    cid_b, _ = platform.register_contributor("bob")
    clock.advance(days=1)
    platform.receive_submission(cid_a, jsonl(words(40), words(25)))
    platform.receive_submission(cid_b, jsonl(words(40), words(60, "z")))
    platform.process_pending()
    platform.ingest_revenue(
        {"event_id": "r1", "occurred_at": "2025-01-10T00:00:00Z", "amount_minor": 12_345, "currency": "USD"}
    )
    clock.set(EPOCH_START + timedelta(days=31))
    platform.close_epoch(1, EPOCH_START + timedelta(days=31))
    return platform


class TestReplay:
    def test_replay_equals_live_after_thousand_random_operations(self, tmp_path):
        import random

        rng = random.Random(1_000)
        clock = FakeClock()
        platform, _ = Platform.initialize(tmp_path / "data", PlatformConfig(), clock=clock)
        contributors = []
        for i in range(1_000):
            clock.advance(minutes=rng.randint(1, 90))
            roll = rng.random()
            if roll < 0.15 or not contributors:
                cid, _ = platform.register_contributor(f"user{i}")
                contributors.append(cid)
            elif roll < 0.45:
                texts = [words(rng.randint(5, 10), f"d{i}x{k}") for k in range(rng.randint(1, 3))]
                platform.receive_submission(rng.choice(contributors), jsonl(*texts))
                platform.process_pending()
            elif roll < 0.9:
                epoch = platform.open_epoch()
                platform.ingest_revenue(
                    {
                        "event_id": f"ev{i}",
                        "occurred_at": epoch.period_start + timedelta(minutes=rng.randint(0, 40_000)),
                        "amount_minor": rng.randint(1, 10**6),
                        "currency": "USD",
                    }
                )
            elif roll < 0.97:
                platform.set_alpha(rng.randint(1, 1_000_000))
            else:
                epoch = platform.open_epoch()
                close_at = epoch.period_end + timedelta(minutes=rng.randint(0, 600))
                clock.set(close_at)
                platform.close_epoch(epoch.epoch_id, close_at)
        digest = platform.state_digest()
        platform.close()
        replayed = Platform.open(tmp_path / "data", clock=clock)
        assert replayed.state_digest() == digest
        replayed.close()

    def test_replay_reproduces_live_state(self, tmp_path):
        clock = FakeClock()
        live = scripted_platform(tmp_path, clock)
        digest = live.state_digest()
        statement = live.statement(1)
        live.close()

        replayed = Platform.open(tmp_path / "data", clock=clock)
        assert replayed.state_digest() == digest
        assert replayed.statement(1) == statement
        replayed.close()

    def test_double_replay_is_identical(self, tmp_path):
        clock = FakeClock()
        live = scripted_platform(tmp_path, clock)
        live.close()
        first = Platform.open(tmp_path / "data", clock=clock)
        digest = first.state_digest()
        first.close()
        second = Platform.open(tmp_path / "data", clock=clock)
        assert second.state_digest() == digest
        second.close()


class TestSnapshot:
    def test_snapshot_plus_tail_equals_full_replay(self, tmp_path):
        clock = FakeClock()
        platform, _ = Platform.initialize(tmp_path / "data", PlatformConfig(), clock=clock)
        cid, _ = platform.register_contributor("alice")
        platform.receive_submission(cid, jsonl(words(40)))
        platform.process_pending()

        snap_path = tmp_path / "snap.json"
        platform.write_snapshot(snap_path)

        # more activity after the snapshot
        platform.ingest_revenue(
            {"event_id": "r1", "occurred_at": "2025-01-05T00:00:00Z", "amount_minor": 999, "currency": "USD"}
        )
        clock.set(EPOCH_START + timedelta(days=30))
        platform.close_epoch(1, EPOCH_START + timedelta(days=30))
        digest = platform.state_digest()
        platform.close()

        restored = Platform.open_from_snapshot(tmp_path / "data", snap_path, clock=clock)
        full = Platform.open(tmp_path / "data", clock=clock)
        assert restored.state_digest() == digest
        assert restored.state_digest() == full.state_digest()
        restored.close()
        full.close()

    def test_restore_of_empty_platform_snapshot(self, tmp_path):
        clock = FakeClock()
        platform, _ = Platform.initialize(tmp_path / "data", PlatformConfig(), clock=clock)
        snap_path = tmp_path / "snap.json"
        platform.write_snapshot(snap_path)
        digest = platform.state_digest()
        platform.close()
        restored = Platform.open_from_snapshot(tmp_path / "data", snap_path, clock=clock)
        assert restored.state_digest() == digest
        assert restored.contributors == {}
        restored.close()

    def test_newer_snapshot_version_refused(self, tmp_path):
        snap_path = tmp_path / "snap.json"
        write_snapshot(snap_path, 1, {"anything": True})
        raw = json.loads(snap_path.read_text())
        raw["version"] = 999
        snap_path.write_text(json.dumps(raw))
        with pytest.raises(SnapshotVersionMismatch):
            read_snapshot(snap_path)

    def test_no_floats_anywhere_in_state(self, tmp_path):
        clock = FakeClock()
        live = scripted_platform(tmp_path, clock)

        def walk(node):
            assert not isinstance(node, float), f"float found: {node!r}"
            if isinstance(node, dict):
                for v in node.values():
                    walk(v)
            elif isinstance(node, list):
                for v in node:
                    walk(v)

        walk(live.state_to_dict())
        live.close()
