"""Bearer-token authentication and the contributor/admin role split."""

from __future__ import annotations

from dataclasses import dataclass

from fastapi import Depends, Request
from fastapi.security.utils import get_authorization_scheme_param

from ..core import ADMIN_PRINCIPAL, Platform
from .errors import api_error


@dataclass(frozen=True)
class Principal:
    principal_id: str

    @property
    def is_admin(self) -> bool:
        return self.principal_id == ADMIN_PRINCIPAL

    @property
    def contributor_id(self) -> str | None:
        return None if self.is_admin else self.principal_id


def get_platform(request: Request) -> Platform:
    return request.app.state.platform


def require_auth(request: Request, platform: Platform = Depends(get_platform)) -> Principal:
    scheme, token = get_authorization_scheme_param(request.headers.get("Authorization", ""))
    if scheme.lower() != "bearer" or not token:
        raise api_error(401, "unauthorized", "missing or malformed bearer token")
    principal_id = platform.principal_for_token(token)
    if principal_id is None:
        raise api_error(401, "unauthorized", "unknown credential")
    return Principal(principal_id)


def require_admin(principal: Principal = Depends(require_auth)) -> Principal:
    if not principal.is_admin:
        raise api_error(403, "forbidden", "administrator credential required")
    return principal


def require_contributor(principal: Principal = Depends(require_auth)) -> Principal:
    if principal.is_admin:
        raise api_error(403, "forbidden", "contributor credential required")
    return principal
