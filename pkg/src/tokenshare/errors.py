"""Domain exceptions. Each carries a stable machine-readable code."""

from __future__ import annotations


class PlatformError(Exception):
    """Base class for all domain errors."""

    code = "platform_error"

    def __init__(self, message: str, detail: object = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class InvalidInput(PlatformError):
    code = "validation_error"


class ConfigError(PlatformError):
    code = "config_error"


class NoContributions(PlatformError):
    """Token pool is empty; the reward pool cannot be apportioned."""

    code = "no_contributions"

    def __init__(self, pool_minor: int):
        super().__init__("no contributions: token total is zero", {"pool_minor": pool_minor})
        self.pool_minor = pool_minor


class UndefinedRatio(PlatformError):
    code = "undefined_ratio"


class UnknownEntity(PlatformError):
    code = "unknown_entity"


class Conflict(PlatformError):
    code = "conflict"


class EpochClosed(PlatformError):
    code = "epoch_closed"


class EpochNotClosable(PlatformError):
    code = "epoch_not_closable"


class PendingEvents(PlatformError):
    """Work is still queued; the epoch snapshot would be inconsistent."""

    code = "pending_events"


class NoParseableRecords(PlatformError):
    code = "no_parseable_records"


class RevenueRejected(PlatformError):
    code = "revenue_rejected"

    def __init__(self, reason: str):
        super().__init__(f"revenue event rejected: {reason}", {"reason": reason})
        self.reason = reason


class ParameterMismatch(PlatformError):
    """Fingerprint/signature parameters do not match the loaded index."""

    code = "parameter_mismatch"


class LogCorruption(PlatformError):
    """Event log failed checksum or sequence verification; halt."""

    code = "log_corruption"


class SnapshotVersionMismatch(PlatformError):
    code = "snapshot_version_mismatch"
