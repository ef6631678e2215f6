"""Exact and near-duplicate detection over normalized documents.

Exact identity is a 128-bit BLAKE2b digest of the normalized text.
Near-duplicate detection estimates Jaccard similarity of character-shingle
sets with MinHash signatures and retrieves candidates through LSH banding.
All hashing is seeded and deterministic: the same text, parameters, and
seed always produce the same digest and signature on any platform.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from hashlib import blake2b
from random import Random
from typing import Iterable, Iterator

from .errors import InvalidInput, ParameterMismatch

MERSENNE_61 = (1 << 61) - 1

SOURCE_CONSUMER = "consumer_corpus"
SOURCE_PUBLIC = "public_corpus"


def contributor_source(contributor_id: str) -> str:
    return f"contributor:{contributor_id}"


def is_corpus_source(source: str) -> bool:
    return source in (SOURCE_CONSUMER, SOURCE_PUBLIC)


@dataclass(frozen=True)
class MinHashParams:
    """Signature parameters; every document in one index must share them."""

    shingle_size: int = 5
    num_perms: int = 128
    bands: int = 16
    rows_per_band: int = 8
    seed: int = 1
    jaccard_threshold: Fraction = Fraction(4, 5)

    def __post_init__(self) -> None:
        if self.shingle_size < 1 or self.num_perms < 1:
            raise InvalidInput("shingle_size and num_perms must be positive")
        if self.bands * self.rows_per_band != self.num_perms:
            raise InvalidInput("bands * rows_per_band must equal num_perms")
        if not 0 <= self.jaccard_threshold <= 1:
            raise InvalidInput("jaccard_threshold must lie in [0, 1]")


def exact_fingerprint(normalized_text: str) -> str:
    """128-bit hex digest of the text; equal digests are treated as equal texts.

    The digest of the empty string is the fixed constant
    "cae66941d9efbd404e4d88758ea67670".
    """
    return blake2b(normalized_text.encode("utf-8"), digest_size=16).hexdigest()


def shingle_set(normalized_text: str, shingle_size: int) -> frozenset[str]:
    """All character shingles; texts shorter than one shingle form a single shingle."""
    if len(normalized_text) < shingle_size:
        return frozenset((normalized_text,))
    return frozenset(normalized_text[i : i + shingle_size] for i in range(len(normalized_text) - shingle_size + 1))


def exact_jaccard(a: frozenset[str], b: frozenset[str]) -> Fraction:
    union = len(a | b)
    if union == 0:
        return Fraction(1)
    return Fraction(len(a & b), union)


def _permutation_coefficients(num_perms: int, seed: int) -> tuple[tuple[int, int], ...]:
    rng = Random(seed)
    return tuple((rng.randrange(1, MERSENNE_61), rng.randrange(0, MERSENNE_61)) for _ in range(num_perms))


_COEFF_CACHE: dict[tuple[int, int], tuple[tuple[int, int], ...]] = {}


def _coefficients(params: MinHashParams) -> tuple[tuple[int, int], ...]:
    key = (params.num_perms, params.seed)
    if key not in _COEFF_CACHE:
        _COEFF_CACHE[key] = _permutation_coefficients(*key)
    return _COEFF_CACHE[key]


def _shingle_hash(shingle: str) -> int:
    return int.from_bytes(blake2b(shingle.encode("utf-8"), digest_size=8).digest(), "big")


def minhash_signature(normalized_text: str, params: MinHashParams) -> tuple[int, ...]:
    """Per-permutation minimum of (a*h + b) mod 2^61-1 over the shingle set."""
    hashes = [_shingle_hash(s) for s in shingle_set(normalized_text, params.shingle_size)]
    return tuple(min((a * h + b) % MERSENNE_61 for h in hashes) for a, b in _coefficients(params))


def estimate_jaccard(sig_a: tuple[int, ...], sig_b: tuple[int, ...]) -> Fraction:
    if len(sig_a) != len(sig_b):
        raise ParameterMismatch("signature lengths differ")
    return Fraction(sum(1 for x, y in zip(sig_a, sig_b) if x == y), len(sig_a))


@dataclass(frozen=True)
class IndexEntry:
    digest: str
    source: str
    first_seen: str  # RFC 3339; informational
    order: int  # insertion sequence; earlier entries win duplicate priority
    signature: tuple[int, ...]


@dataclass(frozen=True)
class NearHit:
    digest: str
    source: str
    estimate: Fraction


@dataclass(frozen=True)
class DuplicateVerdict:
    kind: str  # "exact" | "near" | "unique"
    digest: str | None = None
    source: str | None = None
    estimate: Fraction | None = None


class DedupIndex:
    """Exact digests plus an LSH index over MinHash signatures.

    One entry per digest; the first writer wins permanently. Band buckets
    key on the raw signature rows, so lookups are deterministic across
    processes (no salted hashing anywhere).
    """

    def __init__(self, params: MinHashParams | None = None):
        self.params = params or MinHashParams()
        self._entries: dict[str, IndexEntry] = {}
        self._buckets: dict[tuple[int, tuple[int, ...]], set[str]] = {}
        self._next_order = 0

    def __len__(self) -> int:
        return len(self._entries)

    def fingerprint(self, normalized_text: str) -> str:
        return exact_fingerprint(normalized_text)

    def signature(self, normalized_text: str) -> tuple[int, ...]:
        return minhash_signature(normalized_text, self.params)

    def _band_keys(self, signature: tuple[int, ...]) -> Iterator[tuple[int, tuple[int, ...]]]:
        rows = self.params.rows_per_band
        for band in range(self.params.bands):
            yield band, signature[band * rows : (band + 1) * rows]

    def _check_signature(self, signature: tuple[int, ...]) -> None:
        if len(signature) != self.params.num_perms:
            raise ParameterMismatch(
                f"signature has {len(signature)} slots, index expects {self.params.num_perms}"
            )

    def insert(self, digest: str, signature: tuple[int, ...], source: str, first_seen: str) -> bool:
        """Store one document; repeated digests are a no-op (first wins)."""
        self._check_signature(signature)
        if digest in self._entries:
            return False
        entry = IndexEntry(digest, source, first_seen, self._next_order, tuple(signature))
        self._next_order += 1
        self._entries[digest] = entry
        for key in self._band_keys(entry.signature):
            self._buckets.setdefault(key, set()).add(digest)
        return True

    def exact_lookup(self, digest: str, sources: Iterable[str] | None = None) -> IndexEntry | None:
        entry = self._entries.get(digest)
        if entry is None:
            return None
        if sources is not None and not self._source_match(entry.source, sources):
            return None
        return entry

    @staticmethod
    def _source_match(source: str, sources: Iterable[str]) -> bool:
        for wanted in sources:
            if wanted == source:
                return True
            if wanted == "contributor" and source.startswith("contributor:"):
                return True
        return False

    def near_query(
        self,
        signature: tuple[int, ...],
        sources: Iterable[str] | None = None,
        exclude_digest: str | None = None,
    ) -> list[NearHit]:
        """Verified near hits at or above the Jaccard threshold.

        Candidates come from shared LSH bands; each is verified against the
        signature estimate. Results sort by estimate descending, then by
        ascending digest.
        """
        self._check_signature(signature)
        signature = tuple(signature)
        candidates: set[str] = set()
        for key in self._band_keys(signature):
            candidates.update(self._buckets.get(key, ()))
        hits = []
        for digest in candidates:
            if digest == exclude_digest:
                continue
            entry = self._entries[digest]
            if sources is not None and not self._source_match(entry.source, sources):
                continue
            estimate = estimate_jaccard(signature, entry.signature)
            if estimate >= self.params.jaccard_threshold:
                hits.append(NearHit(digest, entry.source, estimate))
        hits.sort(key=lambda h: (-h.estimate, h.digest))
        return hits

    def query_duplicates(self, normalized_text: str) -> DuplicateVerdict:
        """Classify a document against the whole index: exact, near, or unique."""
        digest = self.fingerprint(normalized_text)
        exact = self.exact_lookup(digest)
        if exact is not None:
            return DuplicateVerdict("exact", exact.digest, exact.source, Fraction(1))
        hits = self.near_query(self.signature(normalized_text))
        if hits:
            best = hits[0]
            return DuplicateVerdict("near", best.digest, best.source, best.estimate)
        return DuplicateVerdict("unique")

    def entries(self) -> list[IndexEntry]:
        return sorted(self._entries.values(), key=lambda e: e.order)

    def to_records(self) -> list[dict]:
        return [
            {
                "digest": e.digest,
                "source": e.source,
                "first_seen": e.first_seen,
                "signature": list(e.signature),
            }
            for e in self.entries()
        ]

    @classmethod
    def from_records(cls, params: MinHashParams, records: Iterable[dict]) -> "DedupIndex":
        index = cls(params)
        for record in records:
            index.insert(
                record["digest"], tuple(record["signature"]), record["source"], record["first_seen"]
            )
        return index


# ---------------------------------------------------------------------------
# Corpus fingerprint files
#
# Binary interchange format for consumer/public corpora: raw text never
# leaves the owner's machine, only digests and signatures do. The header
# pins the signature parameters so mismatched files are rejected at load.

_FP_MAGIC = b"TSFP"
_FP_VERSION = 1
_FP_HEADER = struct.Struct(">4sHHHHHQQ")  # magic, version, shingle, perms, bands, rows, seed, count


def write_fingerprint_file(
    fp: io.BufferedIOBase,
    params: MinHashParams,
    entries: Iterable[tuple[str, tuple[int, ...]]],
) -> int:
    """Write (digest, signature) records; returns the record count."""
    materialized = list(entries)
    fp.write(
        _FP_HEADER.pack(
            _FP_MAGIC,
            _FP_VERSION,
            params.shingle_size,
            params.num_perms,
            params.bands,
            params.rows_per_band,
            params.seed,
            len(materialized),
        )
    )
    row = struct.Struct(f">16s{params.num_perms}Q")
    for digest, signature in materialized:
        fp.write(row.pack(bytes.fromhex(digest), *signature))
    return len(materialized)


def read_fingerprint_file(fp: io.BufferedIOBase) -> tuple[MinHashParams, list[tuple[str, tuple[int, ...]]]]:
    """Parse a fingerprint file; raises ParameterMismatch on format errors."""
    header = fp.read(_FP_HEADER.size)
    if len(header) != _FP_HEADER.size:
        raise ParameterMismatch("fingerprint file truncated before header")
    magic, version, shingle, perms, bands, rows, seed, count = _FP_HEADER.unpack(header)
    if magic != _FP_MAGIC:
        raise ParameterMismatch("not a fingerprint file (bad magic)")
    if version != _FP_VERSION:
        raise ParameterMismatch(f"unsupported fingerprint file version {version}")
    try:
        params = MinHashParams(shingle_size=shingle, num_perms=perms, bands=bands, rows_per_band=rows, seed=seed)
    except InvalidInput as exc:
        raise ParameterMismatch(f"invalid fingerprint parameters: {exc}") from exc
    row = struct.Struct(f">16s{perms}Q")
    entries = []
    for _ in range(count):
        raw = fp.read(row.size)
        if len(raw) != row.size:
            raise ParameterMismatch("fingerprint file truncated mid-record")
        unpacked = row.unpack(raw)
        entries.append((unpacked[0].hex(), tuple(unpacked[1:])))
    return params, entries


def require_matching_params(file_params: MinHashParams, index_params: MinHashParams) -> None:
    """Signature-relevant parameters must match; threshold may differ."""
    relevant = ("shingle_size", "num_perms", "bands", "rows_per_band", "seed")
    for name in relevant:
        if getattr(file_params, name) != getattr(index_params, name):
            raise ParameterMismatch(
                f"fingerprint file {name}={getattr(file_params, name)} "
                f"does not match index {name}={getattr(index_params, name)}"
            )
