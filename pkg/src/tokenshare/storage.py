"""Durable event-sourced persistence.

The platform's full history lives in one append-only log of canonical-JSON
records; current state is a pure fold over that log, which makes every
credited token and every cent of payout reproducible from disk. Appends
are flushed and fsynced before they are acknowledged. Corruption is
fail-stop: a bad checksum or a sequence gap halts replay with a
diagnostic rather than guessing.

Log file layout: 8-byte header (magic "TSEL" + u16 version + u16 reserved),
then per record a u32 big-endian payload length, the canonical-JSON payload
bytes, and the u32 CRC-32 of the payload.
"""

from __future__ import annotations

import json
import os
import struct
import zlib
from pathlib import Path
from typing import Iterator

from .canonical import dump_bytes
from .errors import LogCorruption, SnapshotVersionMismatch

_MAGIC = b"TSEL"
_LOG_VERSION = 1
_HEADER = struct.Struct(">4sHH")
_U32 = struct.Struct(">I")

SNAPSHOT_VERSION = 1


class EventLog:
    """Append-only record log with dense sequence numbers starting at 1."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._last_seq = 0
        if self.path.exists() and self.path.stat().st_size > 0:
            for record in self.records():  # verifies integrity, finds last seq
                self._last_seq = record["seq"]
            self._fp = open(self.path, "ab")
        else:
            self._fp = open(self.path, "wb")
            self._fp.write(_HEADER.pack(_MAGIC, _LOG_VERSION, 0))
            self._flush()

    @property
    def last_seq(self) -> int:
        return self._last_seq

    def _flush(self) -> None:
        self._fp.flush()
        os.fsync(self._fp.fileno())

    def append(self, kind: str, data: dict, at: str) -> int:
        """Durably append one record; returns its sequence number."""
        seq = self._last_seq + 1
        payload = dump_bytes({"seq": seq, "kind": kind, "at": at, "data": data})
        self._fp.write(_U32.pack(len(payload)))
        self._fp.write(payload)
        self._fp.write(_U32.pack(zlib.crc32(payload)))
        self._flush()
        self._last_seq = seq
        return seq

    def records(self, from_seq: int = 1) -> Iterator[dict]:
        """Replay records with seq >= from_seq, verifying checksums and density."""
        expected = 1
        with open(self.path, "rb") as fp:
            header = fp.read(_HEADER.size)
            if len(header) != _HEADER.size:
                raise LogCorruption("log truncated before header")
            magic, version, _ = _HEADER.unpack(header)
            if magic != _MAGIC:
                raise LogCorruption("not an event log (bad magic)")
            if version != _LOG_VERSION:
                raise LogCorruption(f"unsupported log version {version}")
            while True:
                raw_len = fp.read(_U32.size)
                if not raw_len:
                    break
                if len(raw_len) != _U32.size:
                    raise LogCorruption("log truncated mid length prefix")
                (length,) = _U32.unpack(raw_len)
                payload = fp.read(length)
                raw_crc = fp.read(_U32.size)
                if len(payload) != length or len(raw_crc) != _U32.size:
                    raise LogCorruption("log truncated mid record")
                (crc,) = _U32.unpack(raw_crc)
                if zlib.crc32(payload) != crc:
                    raise LogCorruption(f"checksum mismatch at sequence {expected}")
                record = json.loads(payload.decode("ascii"))
                if record["seq"] != expected:
                    raise LogCorruption(f"sequence gap: expected {expected}, found {record['seq']}")
                if record["seq"] >= from_seq:
                    yield record
                expected += 1

    def close(self) -> None:
        self._fp.close()


class BlobStore:
    """Content-addressed text files under a two-level hex fan-out."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, digest: str) -> Path:
        return self.root / digest[:2] / digest[2:4] / digest

    def put(self, digest: str, text: str) -> None:
        path = self._path(digest)
        if path.exists():
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.rename(path)

    def get(self, digest: str) -> str:
        return self._path(digest).read_text(encoding="utf-8")

    def has(self, digest: str) -> bool:
        return self._path(digest).exists()


def write_snapshot(path: Path | str, last_seq: int, state: dict) -> None:
    """Point-in-time compaction: state plus the log position it reflects."""
    path = Path(path)
    body = dump_bytes({"version": SNAPSHOT_VERSION, "last_seq": last_seq, "state": state})
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(body)
    tmp.rename(path)


def read_snapshot(path: Path | str) -> tuple[int, dict]:
    """Returns (last_seq, state); refuses snapshots from other versions."""
    data = json.loads(Path(path).read_bytes().decode("ascii"))
    if data.get("version") != SNAPSHOT_VERSION:
        raise SnapshotVersionMismatch(f"snapshot version {data.get('version')} unsupported")
    return data["last_seq"], data["state"]
