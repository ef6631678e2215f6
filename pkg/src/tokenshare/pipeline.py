"""The per-submission preprocessing funnel.

Fixed stage order: normalize -> quality filters -> exact dedup (within the
submission, then against previously accepted contributor documents) ->
near dedup (same scopes) -> cross-corpus dedup (consumer/public corpora,
exact then near). Every stage records surviving document and token counts,
so contributors can see exactly where their upload lost credit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .dedup import DedupIndex, is_corpus_source
from .errors import NoParseableRecords
from .preprocess import FilterRuleSet, Tokenizer, DEFAULT_TOKENIZER, apply_filters, count_tokens, normalize

STAGES = (
    "received",
    "normalized",
    "filtered",
    "exact_dedup",
    "near_dedup",
    "cross_corpus_dedup",
    "accepted",
)

REASON_UNPARSEABLE = "unparseable"
REASON_SUBMISSION_DUP = "submission_duplicate"
REASON_CONTRIBUTOR_DUP = "contributor_duplicate"
REASON_NEAR_DUP = "near_duplicate"
REASON_CONSUMER_DUP = "consumer_duplicate"
REASON_PUBLIC_DUP = "public_duplicate"


@dataclass
class Document:
    """One submission record as it moves through the funnel."""

    doc_id: str
    raw_text: str | None
    normalized_text: str = ""
    token_count: int = 0
    status: str = "pending"  # "pending" | "accepted" | "rejected"
    rejection_stage: str | None = None
    rejection_reason: str | None = None
    digest: str | None = None
    signature: tuple[int, ...] | None = None

    def reject(self, stage: str, reason: str) -> None:
        self.status = "rejected"
        self.rejection_stage = stage
        self.rejection_reason = reason


@dataclass
class StageReport:
    """Stage-by-stage survival counts plus rejection-reason tallies."""

    submission_id: str
    contributor_id: str
    stages: list[dict] = field(default_factory=list)
    rejections: dict[str, int] = field(default_factory=dict)
    accepted_documents: int = 0
    accepted_tokens: int = 0

    def record_stage(self, stage: str, documents: list[Document]) -> None:
        self.stages.append(
            {
                "stage": stage,
                "documents": len(documents),
                "tokens": sum(doc.token_count for doc in documents),
            }
        )

    def tally(self, reason: str) -> None:
        self.rejections[reason] = self.rejections.get(reason, 0) + 1

    def to_dict(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "contributor_id": self.contributor_id,
            "status": "finalized",
            "stages": self.stages,
            "rejections": self.rejections,
            "accepted_documents": self.accepted_documents,
            "accepted_tokens": self.accepted_tokens,
        }


def parse_jsonl(data: bytes) -> list[str | None]:
    """Parse JSON Lines into texts; unparseable lines become None.

    A record must be a JSON object with a string "text" field. Blank lines
    are not records. Decoding is per line, so one bad line never poisons
    the rest of the file.
    """
    records: list[str | None] = []
    for line in data.split(b"\n"):
        if not line.strip():
            continue
        try:
            obj = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            records.append(None)
            continue
        if isinstance(obj, dict) and isinstance(obj.get("text"), str):
            records.append(obj["text"])
        else:
            records.append(None)
    return records


def run_pipeline(
    submission_id: str,
    contributor_id: str,
    records: list[str | None],
    rules: FilterRuleSet,
    index: DedupIndex,
    tokenizer: Tokenizer = DEFAULT_TOKENIZER,
) -> tuple[StageReport, list[Document]]:
    """Run the funnel over parsed records.

    Returns the report and the accepted documents (with digests and
    signatures) for the caller to commit atomically: nothing here mutates
    the shared index, so a crash mid-run credits nothing.

    Raises NoParseableRecords when not a single record parses.
    """
    report = StageReport(submission_id, contributor_id)
    docs = [Document(f"{submission_id}/{i}", text) for i, text in enumerate(records)]

    parseable = [doc for doc in docs if doc.raw_text is not None]
    if not parseable:
        raise NoParseableRecords(f"submission {submission_id}: no parseable records")
    for doc in docs:
        if doc.raw_text is None:
            doc.reject("received", REASON_UNPARSEABLE)
            report.tally(REASON_UNPARSEABLE)
    for doc in parseable:
        doc.normalized_text = normalize(doc.raw_text)
        doc.token_count = count_tokens(doc.normalized_text, tokenizer)

    report.record_stage("received", docs)  # unparseable records carry zero tokens
    survivors = parseable
    report.record_stage("normalized", survivors)

    kept = []
    for doc in survivors:
        reason = apply_filters(doc.normalized_text, rules)
        if reason is None:
            kept.append(doc)
        else:
            doc.reject("filtered", reason)
            report.tally(reason)
    survivors = kept
    report.record_stage("filtered", survivors)

    # Exact dedup in file order. Every copy of a text that already earns
    # credit in the index is a contributor_duplicate; a repeat of a text
    # first kept within this submission is a submission_duplicate.
    seen_digests: set[str] = set()
    kept = []
    for doc in survivors:
        doc.digest = index.fingerprint(doc.normalized_text)
        if doc.digest in seen_digests:
            doc.reject("exact_dedup", REASON_SUBMISSION_DUP)
            report.tally(REASON_SUBMISSION_DUP)
        elif index.exact_lookup(doc.digest, sources=("contributor",)) is not None:
            doc.reject("exact_dedup", REASON_CONTRIBUTOR_DUP)
            report.tally(REASON_CONTRIBUTOR_DUP)
        else:
            seen_digests.add(doc.digest)
            kept.append(doc)
    survivors = kept
    report.record_stage("exact_dedup", survivors)

    # Near dedup against the same scopes. Scratch index holds the
    # signatures of this submission's survivors so far (file order wins).
    scratch = DedupIndex(index.params)
    kept = []
    for doc in survivors:
        doc.signature = index.signature(doc.normalized_text)
        hit = scratch.near_query(doc.signature) or index.near_query(doc.signature, sources=("contributor",))
        if hit:
            doc.reject("near_dedup", REASON_NEAR_DUP)
            report.tally(REASON_NEAR_DUP)
        else:
            scratch.insert(doc.digest, doc.signature, "submission", "")
            kept.append(doc)
    survivors = kept
    report.record_stage("near_dedup", survivors)

    # Cross-corpus dedup: anything the consumer already possesses (or that
    # is operator-marked public) earns no credit, exact or near.
    corpus_sources = ("consumer_corpus", "public_corpus")
    kept = []
    for doc in survivors:
        entry = index.exact_lookup(doc.digest, sources=corpus_sources)
        if entry is None:
            hits = index.near_query(doc.signature, sources=corpus_sources)
            entry = hits[0] if hits else None
        if entry is not None:
            assert is_corpus_source(entry.source)
            reason = REASON_CONSUMER_DUP if entry.source == "consumer_corpus" else REASON_PUBLIC_DUP
            doc.reject("cross_corpus_dedup", reason)
            report.tally(reason)
        else:
            kept.append(doc)
    survivors = kept
    report.record_stage("cross_corpus_dedup", survivors)

    for doc in survivors:
        doc.status = "accepted"
    report.record_stage("accepted", survivors)
    report.accepted_documents = len(survivors)
    report.accepted_tokens = sum(doc.token_count for doc in survivors)
    return report, survivors
