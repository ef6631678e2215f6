"""HTTP/JSON surface over the platform core.

Submissions are accepted asynchronously: the upload returns immediately
with an id and a background worker runs the preprocessing funnel; clients
poll the submission status. Statements and stage reports are served as
canonical JSON bytes so repeated reads are byte-identical.
"""

from __future__ import annotations

import base64
import binascii
import io
import threading
from contextlib import asynccontextmanager

from fastapi import Depends, FastAPI, Query, Request, Response
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..canonical import dumps, format_ts, parse_ts
from ..core import Platform
from ..dedup import read_fingerprint_file
from ..errors import ParameterMismatch, PlatformError
from ..payout import PayoutEpoch
from . import schemas
from .auth import Principal, get_platform, require_admin, require_auth, require_contributor
from .errors import api_error, to_http


class _Worker:
    """Single background thread draining the submission queue."""

    def __init__(self, platform: Platform):
        self.platform = platform
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, name="submission-worker", daemon=True)

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=5)

    def _run(self) -> None:
        while not self._stop.is_set():
            sid = self.platform.take_pending()
            if sid is None:
                self._stop.wait(0.02)
                continue
            try:
                self.platform.process_submission(sid)
            except PlatformError:
                pass  # recorded on the submission itself; worker must not die


def _canonical_response(payload: dict, status_code: int = 200) -> Response:
    return Response(content=dumps(payload), status_code=status_code, media_type="application/json")


def _encode_cursor(offset: int) -> str:
    return base64.urlsafe_b64encode(dumps({"o": offset}).encode("ascii")).decode("ascii")


def _decode_cursor(cursor: str) -> int:
    try:
        import json

        data = json.loads(base64.urlsafe_b64decode(cursor.encode("ascii")))
        offset = data["o"]
    except (binascii.Error, ValueError, KeyError, TypeError):
        raise api_error(422, "bad_cursor", "cursor is not valid") from None
    if not isinstance(offset, int) or offset < 0:
        raise api_error(422, "bad_cursor", "cursor is not valid")
    return offset


def _ts_param(name: str, value: str):
    try:
        return parse_ts(value)
    except ValueError as exc:
        raise api_error(422, "validation_error", f"bad timestamp for {name!r}: {exc}") from None


def _epoch_summary(epoch: PayoutEpoch) -> schemas.EpochSummary:
    return schemas.EpochSummary(
        epoch_id=epoch.epoch_id,
        period_start=format_ts(epoch.period_start),
        period_end=format_ts(epoch.period_end),
        status=epoch.status,
        alpha_ppm=epoch.alpha_ppm,
    )


def create_app(platform: Platform, auto_process: bool = True) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        worker = _Worker(platform) if auto_process else None
        if worker:
            worker.start()
        app.state.worker = worker
        yield
        if worker:
            worker.stop()

    app = FastAPI(title="tokenshare", version="0.1.0", lifespan=lifespan)
    app.state.platform = platform
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(PlatformError)
    async def _platform_error(request: Request, exc: PlatformError):
        http = to_http(exc)
        return JSONResponse(status_code=http.status_code, content=http.detail)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={
                "code": "validation_error",
                "message": "request validation failed",
                "detail": jsonable_encoder(exc.errors(), custom_encoder={Exception: str}),
            },
        )

    # -- contributors ------------------------------------------------------

    @app.post("/contributors", response_model=schemas.ContributorCreatedResponse, status_code=201)
    def register_contributor(body: schemas.ContributorCreateRequest):
        contributor_id, token = platform.register_contributor(body.display_name)
        account = platform.contributors[contributor_id]
        return schemas.ContributorCreatedResponse(
            contributor_id=contributor_id,
            display_name=account.display_name,
            registered_at=format_ts(account.registered_at),
            api_token=token,
        )

    # -- submissions -------------------------------------------------------

    @app.post("/submissions", response_model=schemas.SubmissionQueuedResponse, status_code=202)
    async def upload_submission(
        request: Request, principal: Principal = Depends(require_contributor)
    ):
        cap = platform.config.submission_size_cap
        buffer = io.BytesIO()
        async for chunk in request.stream():
            buffer.write(chunk)
            if buffer.tell() > cap:
                raise api_error(413, "payload_too_large", f"submission exceeds {cap} bytes")
        submission_id = platform.receive_submission(principal.contributor_id, buffer.getvalue())
        return schemas.SubmissionQueuedResponse(submission_id=submission_id, status="queued")

    def _authorized_submission(platform: Platform, submission_id: str, principal: Principal):
        record = platform.submissions.get(submission_id)
        if record is None:
            raise api_error(404, "unknown_entity", f"unknown submission {submission_id!r}")
        if not principal.is_admin and record.contributor_id != principal.contributor_id:
            raise api_error(403, "forbidden", "submission belongs to another contributor")
        return record

    @app.get("/submissions", response_model=schemas.SubmissionListResponse)
    def list_submissions(
        principal: Principal = Depends(require_auth),
        limit: int = Query(default=50, ge=1, le=500),
        cursor: str | None = None,
    ):
        offset = _decode_cursor(cursor) if cursor else 0
        ids = [
            sid
            for sid in platform.submission_order
            if principal.is_admin
            or platform.submissions[sid].contributor_id == principal.contributor_id
        ]
        page = ids[offset : offset + limit]
        next_cursor = _encode_cursor(offset + limit) if offset + limit < len(ids) else None
        return schemas.SubmissionListResponse(
            submissions=[_submission_status(platform.submissions[sid]) for sid in page],
            next_cursor=next_cursor,
        )

    def _submission_status(record) -> schemas.SubmissionStatusResponse:
        return schemas.SubmissionStatusResponse(
            submission_id=record.submission_id,
            contributor_id=record.contributor_id,
            status=record.status,
            received_at=format_ts(record.received_at),
            finalized_at=format_ts(record.finalized_at) if record.finalized_at else None,
            error=record.error,
        )

    @app.get("/submissions/{submission_id}", response_model=schemas.SubmissionStatusResponse)
    def submission_status(submission_id: str, principal: Principal = Depends(require_auth)):
        record = _authorized_submission(platform, submission_id, principal)
        return _submission_status(record)

    @app.get("/submissions/{submission_id}/report")
    def submission_report(submission_id: str, principal: Principal = Depends(require_auth)):
        _authorized_submission(platform, submission_id, principal)
        return _canonical_response(platform.submission_report(submission_id))

    # -- metrics -------------------------------------------------------------

    def _metrics_response(contributor_id: str, as_of) -> schemas.MetricsResponse:
        view = platform.metrics_view(contributor_id, as_of)
        return schemas.MetricsResponse(
            contributor_id=contributor_id,
            as_of=format_ts(as_of),
            metrics=schemas.MetricsView(**view),
        )

    @app.get("/metrics")
    def metrics(principal: Principal = Depends(require_auth), as_of: str | None = None):
        moment = _ts_param("as_of", as_of) if as_of else platform.clock()
        if principal.is_admin:
            return schemas.AllMetricsResponse(
                as_of=format_ts(moment),
                contributors=[
                    _metrics_response(cid, moment) for cid in sorted(platform.contributors)
                ],
            )
        return _metrics_response(principal.contributor_id, moment)

    # -- revenue ----------------------------------------------------------------

    @app.post("/revenue/events", response_model=schemas.RevenueEventResponse)
    def ingest_revenue(body: schemas.RevenueEventRequest, principal: Principal = Depends(require_admin)):
        status = platform.ingest_revenue(
            {
                "event_id": body.event_id,
                "occurred_at": body.occurred_at,
                "amount_minor": body.amount_minor,
                "currency": body.currency,
                "usage_meta": body.usage_meta,
            }
        )
        return schemas.RevenueEventResponse(status=status)

    @app.get("/revenue/usage", response_model=schemas.UsageResponse)
    def revenue_usage(
        start: str,
        end: str,
        principal: Principal = Depends(require_auth),
    ):
        window = (_ts_param("start", start), _ts_param("end", end))
        buckets = platform.usage_detail(*window)
        return schemas.UsageResponse(
            start=format_ts(window[0]),
            end=format_ts(window[1]),
            total_amount_minor=platform.aggregate_revenue(*window),
            buckets=[schemas.UsageBucket(**bucket) for bucket in buckets],
        )

    # -- epochs -------------------------------------------------------------------

    @app.get("/epochs", response_model=schemas.EpochListResponse)
    def list_epochs(principal: Principal = Depends(require_auth)):
        return schemas.EpochListResponse(
            epochs=[_epoch_summary(platform.epochs[eid]) for eid in sorted(platform.epochs)]
        )

    @app.get("/epochs/open", response_model=schemas.EpochSummary)
    def open_epoch(principal: Principal = Depends(require_auth)):
        return _epoch_summary(platform.open_epoch())

    @app.get("/epochs/{epoch_id}/statement")
    def epoch_statement(epoch_id: int, principal: Principal = Depends(require_auth)):
        if principal.is_admin:
            body = platform.statement(epoch_id)
        else:
            body = platform.statement_for(epoch_id, principal.contributor_id)
        return Response(content=body, media_type="application/json")

    @app.post("/epochs/{epoch_id}/close")
    def close_epoch(
        epoch_id: int,
        body: schemas.CloseEpochRequest | None = None,
        principal: Principal = Depends(require_admin),
    ):
        body = body or schemas.CloseEpochRequest()
        close_time = body.close_time or platform.clock()
        statement = platform.close_epoch(epoch_id, close_time, override=body.override)
        return Response(content=statement, media_type="application/json")

    # -- administration --------------------------------------------------------------

    @app.post("/corpus", response_model=schemas.CorpusLoadResponse)
    async def load_corpus(
        request: Request,
        source: str = Query(default="consumer_corpus"),
        principal: Principal = Depends(require_admin),
    ):
        raw = await request.body()
        try:
            params, entries = read_fingerprint_file(io.BytesIO(raw))
        except ParameterMismatch as exc:
            raise to_http(exc) from None
        added = platform.load_corpus(source, params, entries)
        return schemas.CorpusLoadResponse(source=source, entries_added=added)

    @app.post("/config/alpha", response_model=schemas.AlphaUpdateResponse)
    def set_alpha(body: schemas.AlphaUpdateRequest, principal: Principal = Depends(require_admin)):
        platform.set_alpha(body.alpha_ppm)
        return schemas.AlphaUpdateResponse(
            alpha_ppm=body.alpha_ppm, applies_from_epoch=platform.open_epoch_id + 1
        )

    @app.get("/config")
    def get_config(principal: Principal = Depends(require_auth)):
        # Transparency: contributors can audit every parameter that shapes
        # token counts and payouts.
        return _canonical_response(platform.config.to_dict())

    return app
