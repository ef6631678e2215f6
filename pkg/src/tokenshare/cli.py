"""Command-line client for contributors and the consumer admin.

All figures come from the server; the CLI never computes money locally.
Exit codes: 0 success, 1 server/network error, 2 local validation error.

Configuration precedence: flags, then TOKENSHARE_SERVER / TOKENSHARE_TOKEN
environment variables, then ~/.config/tokenshare/config (key = value
lines with `server` and `token`).
"""

from __future__ import annotations

import io
import json
import os
import stat
import sys
import time
from pathlib import Path

import click
import httpx

from .canonical import dumps
from .config import PlatformConfig, load_config
from .core import Platform
from .dedup import MinHashParams, exact_fingerprint, minhash_signature, write_fingerprint_file
from .errors import PlatformError
from .preprocess import normalize

DEFAULT_CONFIG_PATH = Path("~/.config/tokenshare/config").expanduser()

EXIT_SERVER = 1
EXIT_LOCAL = 2


def _fail_local(message: str) -> "SystemExit":
    click.echo(f"error: {message}", err=True)
    return SystemExit(EXIT_LOCAL)


def _fail_server(message: str) -> "SystemExit":
    click.echo(f"server error: {message}", err=True)
    return SystemExit(EXIT_SERVER)


def _read_cli_config(path: Path) -> dict[str, str]:
    if not path.exists():
        return {}
    mode = stat.S_IMODE(path.stat().st_mode)
    if mode & 0o077:
        click.echo(f"warning: {path} is readable by other users (mode {oct(mode)})", err=True)
    values: dict[str, str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line or "=" not in line:
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


class Session:
    """Resolved connection settings plus a thin HTTP wrapper."""

    def __init__(self, server: str | None, token: str | None, json_mode: bool):
        file_values = _read_cli_config(DEFAULT_CONFIG_PATH)
        self.server = server or os.environ.get("TOKENSHARE_SERVER") or file_values.get("server")
        self.token = token or os.environ.get("TOKENSHARE_TOKEN") or file_values.get("token")
        self.json_mode = json_mode

    def client(self) -> httpx.Client:
        if not self.server:
            raise _fail_local("no server configured (use --server, TOKENSHARE_SERVER, or the config file)")
        headers = {"Authorization": f"Bearer {self.token}"} if self.token else {}
        return httpx.Client(base_url=self.server, headers=headers, timeout=60.0)

    def request(self, method: str, path: str, **kwargs) -> httpx.Response:
        try:
            with self.client() as client:
                response = client.request(method, path, **kwargs)
        except httpx.HTTPError as exc:
            raise _fail_server(f"{type(exc).__name__}: {exc}") from None
        if response.status_code >= 400:
            raise _fail_server(_describe_error(response))
        return response


def _describe_error(response: httpx.Response) -> str:
    try:
        body = response.json()
        return f"HTTP {response.status_code}: {body.get('code')}: {body.get('message')}"
    except ValueError:
        return f"HTTP {response.status_code}: {response.text[:200]}"


pass_session = click.make_pass_decorator(Session)


@click.group()
@click.option("--server", help="Base URL of the platform API.")
@click.option("--token", help="Bearer credential (never echoed).")
@click.option("--json", "json_mode", is_flag=True, help="Emit canonical JSON instead of tables.")
@click.pass_context
def main(ctx: click.Context, server: str | None, token: str | None, json_mode: bool) -> None:
    """Data-sharing platform client."""
    ctx.obj = Session(server, token, json_mode)


# -- server-side operator commands ------------------------------------------


@main.command()
@click.option("--data-dir", type=click.Path(path_type=Path), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None,
              help="Platform config file (key = value lines).")
@click.option("--alpha-ppm", type=int, default=None, help="Revenue share in parts-per-million.")
@click.option("--epoch-days", type=int, default=None)
@click.option("--currency", default=None)
def init(data_dir: Path, config_path: Path | None, alpha_ppm: int | None,
         epoch_days: int | None, currency: str | None) -> None:
    """Initialize a new platform data directory and print the admin token."""
    try:
        config = load_config(config_path) if config_path else PlatformConfig()
        overrides = {}
        if alpha_ppm is not None:
            overrides["alpha_ppm"] = alpha_ppm
        if epoch_days is not None:
            overrides["epoch_length_days"] = epoch_days
        if currency is not None:
            overrides["currency_code"] = currency
        if overrides:
            config = PlatformConfig.from_dict({**config.to_dict(), **overrides})
        data_dir.mkdir(parents=True, exist_ok=True)
        platform, admin_token = Platform.initialize(data_dir, config)
        platform.close()
    except PlatformError as exc:
        raise _fail_local(exc.message) from None
    click.echo(f"initialized platform at {data_dir}")
    click.echo(f"admin token: {admin_token}")
    click.echo("store the token now; only its hash is kept on disk")


@main.command()
@click.option("--data-dir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8800)
def serve(data_dir: Path, host: str, port: int) -> None:
    """Run the platform API server."""
    import uvicorn

    from .service import create_app

    platform = Platform.open(data_dir)
    uvicorn.run(create_app(platform), host=host, port=port)


# -- contributor commands -----------------------------------------------------


@main.group()
def contrib() -> None:
    """Contributor operations."""


@contrib.command()
@click.option("--name", required=True)
@pass_session
def register(session: Session, name: str) -> None:
    """Register a contributor account; prints the credential once."""
    response = session.request("POST", "/contributors", json={"display_name": name})
    body = response.json()
    if session.json_mode:
        click.echo(dumps(body))
        return
    click.echo(f"contributor_id: {body['contributor_id']}")
    click.echo(f"api token: {body['api_token']}")
    click.echo("store the token now; it is not retrievable later")


def _validate_jsonl(path: Path) -> int:
    """Every non-blank line must be a JSON object with a string "text" field."""
    records = 0
    with open(path, "rb") as fp:
        for lineno, line in enumerate(fp, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise _fail_local(f"{path}:{lineno}: not valid JSON ({exc})") from None
            if not isinstance(obj, dict) or not isinstance(obj.get("text"), str):
                raise _fail_local(f'{path}:{lineno}: record must be an object with a string "text" field')
            records += 1
    if records == 0:
        raise _fail_local(f"{path}: no records found")
    return records


@contrib.command()
@click.argument("file", type=click.Path(exists=True, path_type=Path))
@pass_session
def upload(session: Session, file: Path) -> None:
    """Upload a JSON Lines dataset; prints the submission id."""
    _validate_jsonl(file)
    response = session.request(
        "POST",
        "/submissions",
        content=file.read_bytes(),
        headers={"Content-Type": "application/x-ndjson"},
    )
    body = response.json()
    if session.json_mode:
        click.echo(dumps(body))
    else:
        click.echo(f"submission accepted: {body['submission_id']} (status {body['status']})")


def _print_funnel(report: dict) -> None:
    click.echo(f"submission {report['submission_id']}: {report['status']}")
    click.echo(f"{'stage':<20} {'documents':>10} {'tokens':>12}")
    for stage in report["stages"]:
        if stage.get("pending"):
            click.echo(f"{stage['stage']:<20} {'pending':>10} {'pending':>12}")
        else:
            click.echo(f"{stage['stage']:<20} {stage['documents']:>10} {stage['tokens']:>12}")
    if report["rejections"]:
        click.echo("rejections:")
        for reason in sorted(report["rejections"]):
            click.echo(f"  {reason}: {report['rejections'][reason]}")


@contrib.command()
@click.argument("submission_id")
@click.option("--wait", is_flag=True, help="Poll until processing finishes.")
@click.option("--poll-interval", type=float, default=0.2, show_default=True)
@pass_session
def status(session: Session, submission_id: str, wait: bool, poll_interval: float) -> None:
    """Show a submission's status and stage funnel."""
    while True:
        state = session.request("GET", f"/submissions/{submission_id}").json()
        if not wait or state["status"] in ("finalized", "failed"):
            break
        time.sleep(poll_interval)
    report = session.request("GET", f"/submissions/{submission_id}/report")
    if session.json_mode:
        click.echo(report.text)  # canonical bytes as served
    else:
        _print_funnel(report.json())


@contrib.command()
@click.option("--as-of", default=None, help="RFC 3339 instant to evaluate at (default: now).")
@pass_session
def metrics(session: Session, as_of: str | None) -> None:
    """The four landing-page figures for this account."""
    params = {"as_of": as_of} if as_of else None
    body = session.request("GET", "/metrics", params=params).json()
    view = body["metrics"]
    if session.json_mode:
        click.echo(dumps(view))
        return
    click.echo(f"contribution ratio:        {view['contribution_ratio']}")
    click.echo(f"contribution token count:  {view['contribution_token_count']}")
    click.echo(f"current monetary reward:   {view['current_monetary_reward_minor']} (minor units)")
    click.echo(f"expected payout:           {view['expected_payout_minor']} (minor units)")


# -- consumer admin commands ----------------------------------------------------


@main.group()
def admin() -> None:
    """Consumer-admin operations."""


def _iter_corpus_texts(directory: Path):
    for path in sorted(directory.rglob("*")):
        if not path.is_file():
            continue
        if path.suffix == ".txt":
            yield path.read_text(encoding="utf-8")
        elif path.suffix == ".jsonl":
            for line in path.read_bytes().split(b"\n"):
                if not line.strip():
                    continue
                obj = json.loads(line.decode("utf-8"))
                if isinstance(obj, dict) and isinstance(obj.get("text"), str):
                    yield obj["text"]


@admin.command("load-corpus")
@click.argument("directory", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--source", type=click.Choice(["consumer_corpus", "public_corpus"]), default="consumer_corpus")
@pass_session
def load_corpus(session: Session, directory: Path, source: str) -> None:
    """Fingerprint a corpus locally and upload fingerprints only.

    Raw text never leaves this machine; the server receives digests and
    MinHash signatures in the binary fingerprint format.
    """
    remote = session.request("GET", "/config").json()["minhash"]
    params = MinHashParams(
        shingle_size=remote["shingle_size"],
        num_perms=remote["num_perms"],
        bands=remote["bands"],
        rows_per_band=remote["rows_per_band"],
        seed=remote["seed"],
    )
    entries = []
    seen = set()
    for text in _iter_corpus_texts(directory):
        normalized = normalize(text)
        digest = exact_fingerprint(normalized)
        if digest in seen:
            continue
        seen.add(digest)
        entries.append((digest, minhash_signature(normalized, params)))
    if not entries:
        raise _fail_local(f"no corpus documents found under {directory}")
    buffer = io.BytesIO()
    write_fingerprint_file(buffer, params, entries)
    response = session.request(
        "POST",
        "/corpus",
        params={"source": source},
        content=buffer.getvalue(),
        headers={"Content-Type": "application/octet-stream"},
    )
    body = response.json()
    if session.json_mode:
        click.echo(dumps(body))
    else:
        click.echo(f"fingerprinted {len(entries)} documents; server added {body['entries_added']} new entries")


@admin.command("close-epoch")
@click.option("--epoch", "epoch_id", type=int, default=None, help="Epoch id (default: the open epoch).")
@click.option("--at", "close_time", default=None, help="RFC 3339 close instant (default: now).")
@click.option("--force", is_flag=True, help="Allow closing before the period end.")
@pass_session
def close_epoch(session: Session, epoch_id: int | None, close_time: str | None, force: bool) -> None:
    """Close an epoch and print its payout statement."""
    if epoch_id is None:
        epoch_id = session.request("GET", "/epochs/open").json()["epoch_id"]
    payload: dict = {"override": force}
    if close_time:
        payload["close_time"] = close_time
    response = session.request("POST", f"/epochs/{epoch_id}/close", json=payload)
    if session.json_mode:
        click.echo(response.text)  # canonical statement bytes
        return
    body = response.json()
    click.echo(f"epoch {body['epoch_id']} closed at {body['closed_at']}")
    click.echo(f"revenue total: {body['revenue_total_minor']} {body['currency']} (minor units)")
    click.echo(f"pool (alpha {body['alpha_ppm']} ppm): {body['pool_minor']}")
    if body["undistributed_minor"]:
        click.echo(f"undistributed (no contributions): {body['undistributed_minor']}")
    click.echo(f"{'contributor':<16} {'tokens':>12} {'reward':>12}")
    for line in body["lines"]:
        click.echo(f"{line['contributor_id']:<16} {line['tokens']:>12} {line['reward_minor']:>12}")


@admin.command("set-alpha")
@click.argument("ppm", type=int)
@pass_session
def set_alpha(session: Session, ppm: int) -> None:
    """Set the revenue share (ppm) applied to the next epoch onward."""
    if not 0 < ppm <= 1_000_000:
        raise _fail_local("alpha must lie in (0, 1000000] parts-per-million")
    body = session.request("POST", "/config/alpha", json={"alpha_ppm": ppm}).json()
    if session.json_mode:
        click.echo(dumps(body))
    else:
        click.echo(f"alpha set to {body['alpha_ppm']} ppm from epoch {body['applies_from_epoch']}")


if __name__ == "__main__":
    main()
