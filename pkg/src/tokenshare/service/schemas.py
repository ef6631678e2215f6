"""Pydantic request/response models for the HTTP surface."""

from __future__ import annotations

from typing import Any

from pydantic import AwareDatetime, BaseModel, Field, field_validator


class ErrorBody(BaseModel):
    code: str
    message: str
    detail: Any = None


class ContributorCreateRequest(BaseModel):
    display_name: str = Field(min_length=1, max_length=200)

    @field_validator("display_name")
    @classmethod
    def _strip(cls, value: str) -> str:
        value = value.strip()
        if not value:
            raise ValueError("display_name must not be blank")
        return value


class ContributorCreatedResponse(BaseModel):
    contributor_id: str
    display_name: str
    registered_at: str
    api_token: str  # shown exactly once; only a hash is stored


class SubmissionQueuedResponse(BaseModel):
    submission_id: str
    status: str


class SubmissionStatusResponse(BaseModel):
    submission_id: str
    contributor_id: str
    status: str
    received_at: str
    finalized_at: str | None = None
    error: str | None = None


class SubmissionListResponse(BaseModel):
    submissions: list[SubmissionStatusResponse]
    next_cursor: str | None = None


class MetricsView(BaseModel):
    """Exactly the four landing-page figures."""

    contribution_ratio: str
    contribution_token_count: int
    current_monetary_reward_minor: int
    expected_payout_minor: int


class MetricsResponse(BaseModel):
    contributor_id: str
    as_of: str
    metrics: MetricsView


class AllMetricsResponse(BaseModel):
    as_of: str
    contributors: list[MetricsResponse]


class RevenueEventRequest(BaseModel):
    event_id: str = Field(min_length=1)
    occurred_at: AwareDatetime
    amount_minor: int
    currency: str
    usage_meta: dict[str, Any] = Field(default_factory=dict)


class RevenueEventResponse(BaseModel):
    status: str  # "accepted" | "duplicate"


class UsageBucket(BaseModel):
    day: str
    amount_minor: int
    event_count: int
    endpoints: dict[str, dict[str, int]]


class UsageResponse(BaseModel):
    start: str
    end: str
    total_amount_minor: int
    buckets: list[UsageBucket]


class EpochSummary(BaseModel):
    epoch_id: int
    period_start: str
    period_end: str
    status: str
    alpha_ppm: int


class EpochListResponse(BaseModel):
    epochs: list[EpochSummary]


class CloseEpochRequest(BaseModel):
    close_time: AwareDatetime | None = None
    override: bool = False


class AlphaUpdateRequest(BaseModel):
    alpha_ppm: int


class AlphaUpdateResponse(BaseModel):
    alpha_ppm: int
    applies_from_epoch: int


class CorpusLoadResponse(BaseModel):
    source: str
    entries_added: int


class ForecastResponse(BaseModel):
    as_of: str
    status: str
    projected_epoch_revenue_minor: int
    expected_payout_minor: dict[str, int]
