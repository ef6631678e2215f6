"""Exact-arithmetic payout math: apportionment, ratios, and forecasting.

The contributor pool for an accounting period is ``floor(alpha_ppm *
revenue / 1_000_000)`` where alpha is the configured revenue share in
parts-per-million. The pool is split in proportion to token counts using
the largest-remainder method, so rewards are integers that sum to the pool
exactly. No floating point touches any money path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta
from fractions import Fraction
from typing import Mapping

from .canonical import format_ts
from .errors import InvalidInput, NoContributions, UndefinedRatio

PPM = 1_000_000


@dataclass(frozen=True)
class PayoutLine:
    """One contributor's settled share of a closed epoch."""

    contributor_id: str
    tokens: int
    reward_minor: int


@dataclass
class PayoutEpoch:
    """A contiguous accounting period; exactly one epoch is open at a time."""

    epoch_id: int
    period_start: datetime
    period_end: datetime
    alpha_ppm: int
    status: str = "open"  # "open" | "closed"
    closed_at: datetime | None = None
    revenue_total_minor: int = 0
    undistributed_minor: int = 0
    token_snapshot: dict[str, int] = field(default_factory=dict)
    lines: list[PayoutLine] = field(default_factory=list)


@dataclass(frozen=True)
class ForecastEstimate:
    """Projected end-of-epoch payout based on the revenue rate so far."""

    as_of: datetime
    status: str  # "ok" | "insufficient_data" | "no_contributions"
    projected_epoch_revenue_minor: int
    expected_payout_minor: dict[str, int]


def _validate_inputs(token_snapshot: Mapping[str, int], revenue_total_minor: int, alpha_ppm: int) -> None:
    if not isinstance(revenue_total_minor, int) or revenue_total_minor < 0:
        raise InvalidInput("revenue_total_minor must be a non-negative integer")
    if not isinstance(alpha_ppm, int) or not 0 <= alpha_ppm <= PPM:
        raise InvalidInput("alpha_ppm must be an integer in [0, 1_000_000]")
    for cid, tokens in token_snapshot.items():
        if not isinstance(tokens, int) or tokens < 0:
            raise InvalidInput(f"token count for {cid!r} must be a non-negative integer")


def alpha_pool(revenue_total_minor: int, alpha_ppm: int) -> int:
    """Contributor pool in minor units: floor(alpha_ppm * revenue / 1e6)."""
    _validate_inputs({}, revenue_total_minor, alpha_ppm)
    return alpha_ppm * revenue_total_minor // PPM


def compute_rewards(
    token_snapshot: Mapping[str, int],
    revenue_total_minor: int,
    alpha_ppm: int,
) -> list[PayoutLine]:
    """Apportion the alpha pool over contributors by token share.

    Each contributor's exact quota is ``pool * tokens / total_tokens``;
    integer rewards are the quota floors plus one extra unit for the
    largest fractional remainders (ties broken by ascending contributor
    id). Returns lines sorted by contributor id; rewards sum to the pool.
    Raises NoContributions when the token total is zero.
    """
    _validate_inputs(token_snapshot, revenue_total_minor, alpha_ppm)
    pool = alpha_pool(revenue_total_minor, alpha_ppm)
    total = sum(token_snapshot.values())
    if total == 0:
        raise NoContributions(pool)

    order = sorted(token_snapshot)
    base: dict[str, int] = {}
    remainder: dict[str, int] = {}
    for cid in order:
        numerator = pool * token_snapshot[cid]
        base[cid], remainder[cid] = divmod(numerator, total)

    leftover = pool - sum(base.values())
    for cid in sorted(order, key=lambda c: (-remainder[c], c))[:leftover]:
        base[cid] += 1

    return [PayoutLine(cid, token_snapshot[cid], base[cid]) for cid in order]


def contribution_ratio(contributor_id: str, token_snapshot: Mapping[str, int]) -> Fraction:
    """Exact token share T_i / sum(T); the shares over all ids sum to 1."""
    if contributor_id not in token_snapshot:
        raise InvalidInput(f"unknown contributor {contributor_id!r}")
    _validate_inputs(token_snapshot, 0, 0)
    total = sum(token_snapshot.values())
    if total == 0:
        raise UndefinedRatio("token total is zero; ratio undefined")
    return Fraction(token_snapshot[contributor_id], total)


def expected_payout(
    now: datetime,
    open_epoch: PayoutEpoch,
    revenue_so_far_minor: int,
    token_snapshot: Mapping[str, int],
    alpha_ppm: int,
) -> ForecastEstimate:
    """Linear-rate forecast of the open epoch's payout.

    Projects ``floor(revenue_so_far * epoch_duration / elapsed)`` from the
    rate observed since the epoch opened, then apportions it exactly like a
    real close would. Zero elapsed time yields an "insufficient_data"
    estimate instead of dividing by zero.
    """
    if not open_epoch.period_start <= now <= open_epoch.period_end:
        raise InvalidInput("forecast time must lie within the open epoch")
    _validate_inputs(token_snapshot, revenue_so_far_minor, alpha_ppm)

    tick = timedelta(microseconds=1)
    elapsed = (now - open_epoch.period_start) // tick
    duration = (open_epoch.period_end - open_epoch.period_start) // tick
    if elapsed == 0:
        return ForecastEstimate(now, "insufficient_data", 0, {})

    projected = revenue_so_far_minor * duration // elapsed
    try:
        lines = compute_rewards(token_snapshot, projected, alpha_ppm)
    except NoContributions:
        return ForecastEstimate(now, "no_contributions", projected, {})
    return ForecastEstimate(now, "ok", projected, {line.contributor_id: line.reward_minor for line in lines})


def epoch_statement(epoch: PayoutEpoch, currency_code: str) -> dict:
    """Statement dict for a closed epoch; canonical-JSON serializable.

    Lines appear in ascending contributor-id order so the serialized
    statement is byte-comparable across runs.
    """
    if epoch.status != "closed":
        raise InvalidInput(f"epoch {epoch.epoch_id} is not closed")
    assert epoch.closed_at is not None
    return {
        "epoch_id": epoch.epoch_id,
        "period_start": format_ts(epoch.period_start),
        "period_end": format_ts(epoch.period_end),
        "closed_at": format_ts(epoch.closed_at),
        "currency": currency_code,
        "alpha_ppm": epoch.alpha_ppm,
        "revenue_total_minor": epoch.revenue_total_minor,
        "pool_minor": alpha_pool(epoch.revenue_total_minor, epoch.alpha_ppm),
        "undistributed_minor": epoch.undistributed_minor,
        "no_contributions": sum(epoch.token_snapshot.values()) == 0,
        "token_total": sum(epoch.token_snapshot.values()),
        "lines": [
            {"contributor_id": line.contributor_id, "tokens": line.tokens, "reward_minor": line.reward_minor}
            for line in sorted(epoch.lines, key=lambda l: l.contributor_id)
        ],
    }
