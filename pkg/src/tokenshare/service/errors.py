"""Uniform error bodies: every failure is {code, message, detail}."""

from __future__ import annotations

from fastapi import HTTPException

from ..errors import (
    Conflict,
    ConfigError,
    EpochClosed,
    EpochNotClosable,
    InvalidInput,
    NoParseableRecords,
    ParameterMismatch,
    PendingEvents,
    PlatformError,
    RevenueRejected,
    UndefinedRatio,
    UnknownEntity,
)

_STATUS_BY_TYPE: list[tuple[type, int]] = [
    (UnknownEntity, 404),
    (Conflict, 409),
    (EpochNotClosable, 409),
    (PendingEvents, 409),
    (EpochClosed, 422),
    (RevenueRejected, 422),
    (NoParseableRecords, 422),
    (ParameterMismatch, 422),
    (UndefinedRatio, 422),
    (ConfigError, 422),
    (InvalidInput, 422),
]


def api_error(status: int, code: str, message: str, detail: object = None) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message, "detail": detail})


def to_http(exc: PlatformError) -> HTTPException:
    for exc_type, status in _STATUS_BY_TYPE:
        if isinstance(exc, exc_type):
            return api_error(status, exc.code, exc.message, exc.detail)
    return api_error(500, exc.code, exc.message, exc.detail)
