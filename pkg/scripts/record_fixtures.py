"""Record real API responses as dashboard test fixtures.

Runs the demo scenario against an in-process service and writes each
response body to frontend/fixtures/. The dashboard's snapshot tests render
exclusively from these files, so displayed figures are provably the
server's own integers.
"""

from __future__ import annotations

import io
import json
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path
from tempfile import TemporaryDirectory

from fastapi.testclient import TestClient

from tokenshare.config import PlatformConfig
from tokenshare.core import Platform
from tokenshare.dedup import exact_fingerprint, minhash_signature, write_fingerprint_file
from tokenshare.preprocess import normalize
from tokenshare.service import create_app

START = datetime(2025, 1, 1, tzinfo=timezone.utc)

C1 = "the consumer already owns this exact reference document about maritime law."
A1 = "alpha document one discusses harbor dredging schedules across twelve ports."
A4 = "tiny doc."
A5 = ("pattern " * 8).strip()
B2 = ("pattern " * 12).strip()
B3 = "bravo dataset covers lighthouse maintenance budgets along northern coastlines."


def jsonl(*texts: str) -> bytes:
    return b"\n".join(json.dumps({"text": t}).encode() for t in texts)


def main(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    clock_now = [START]
    with TemporaryDirectory() as tmp:
        platform, admin_token = Platform.initialize(
            Path(tmp) / "data", PlatformConfig(), clock=lambda: clock_now[0]
        )
        admin = {"Authorization": f"Bearer {admin_token}"}
        app = create_app(platform, auto_process=False)

        def save(name: str, response) -> None:
            assert response.status_code < 300, (name, response.status_code, response.text)
            (out_dir / name).write_text(json.dumps(response.json(), indent=2, sort_keys=True) + "\n")
            print(f"recorded {name}")

        with TestClient(app) as client:
            clock_now[0] += timedelta(hours=1)
            alice = client.post("/contributors", json={"display_name": "alice"}).json()
            clock_now[0] += timedelta(hours=1)
            bob = client.post("/contributors", json={"display_name": "bob"}).json()
            clock_now[0] += timedelta(hours=1)
            carol = client.post("/contributors", json={"display_name": "carol"}).json()
            auth = {
                name: {"Authorization": f"Bearer {acc['api_token']}"}
                for name, acc in (("alice", alice), ("bob", bob), ("carol", carol))
            }

            buffer = io.BytesIO()
            params = platform.config.minhash
            normalized = normalize(C1)
            write_fingerprint_file(
                buffer, params, [(exact_fingerprint(normalized), minhash_signature(normalized, params))]
            )
            client.post("/corpus", content=buffer.getvalue(), headers=admin)

            clock_now[0] = START + timedelta(days=1)
            s1 = client.post("/submissions", content=jsonl(A1, C1, A1, A4, A5), headers=auth["alice"]).json()
            platform.process_pending()
            clock_now[0] = START + timedelta(days=2)
            s2 = client.post("/submissions", content=jsonl(A1, B2, B3), headers=auth["bob"]).json()
            platform.process_pending()
            clock_now[0] = START + timedelta(days=3)
            s3 = client.post("/submissions", content=jsonl(A1, C1), headers=auth["bob"]).json()
            platform.process_pending()

            # a queued submission, recorded before processing
            clock_now[0] = START + timedelta(days=4)
            s4 = client.post("/submissions", content=jsonl(A1), headers=auth["alice"]).json()
            save("report_pending.json", client.get(f"/submissions/{s4['submission_id']}/report", headers=auth["alice"]))
            platform.process_pending()

            save("report_s1.json", client.get(f"/submissions/{s1['submission_id']}/report", headers=auth["alice"]))
            save("report_s2.json", client.get(f"/submissions/{s2['submission_id']}/report", headers=auth["bob"]))
            save("report_all_dupes.json", client.get(f"/submissions/{s3['submission_id']}/report", headers=auth["bob"]))

            for i, (when, amount, endpoint, requests) in enumerate(
                (
                    ("2025-01-05T12:00:00Z", 40_000, "chat/completions", 1600),
                    ("2025-01-12T09:30:00Z", 35_000, "embeddings", 5000),
                    ("2025-01-20T18:45:00Z", 25_000, "chat/completions", 900),
                )
            ):
                client.post(
                    "/revenue/events",
                    json={
                        "event_id": f"ev-{i:03d}",
                        "occurred_at": when,
                        "amount_minor": amount,
                        "currency": "USD",
                        "usage_meta": {"endpoint": endpoint, "request_count": requests},
                    },
                    headers=admin,
                )

            save("config.json", client.get("/config", headers=admin))
            save("metrics_alice.json", client.get("/metrics?as_of=2025-01-16T00:00:00Z", headers=auth["alice"]))
            save("metrics_bob.json", client.get("/metrics?as_of=2025-01-16T00:00:00Z", headers=auth["bob"]))
            save("metrics_zero.json", client.get("/metrics?as_of=2025-01-16T00:00:00Z", headers=auth["carol"]))
            save("open_epoch_before_close.json", client.get("/epochs/open", headers=auth["alice"]))
            save(
                "usage.json",
                client.get(
                    "/revenue/usage?start=2025-01-01T00:00:00Z&end=2025-01-31T00:00:00Z",
                    headers=auth["alice"],
                ),
            )

            clock_now[0] = START + timedelta(days=30)
            client.post("/epochs/1/close", json={"close_time": "2025-01-31T00:00:00Z"}, headers=admin)
            save("statement_1.json", client.get("/epochs/1/statement", headers=admin))
            save("statement_1_alice.json", client.get("/epochs/1/statement", headers=auth["alice"]))
            save("epochs.json", client.get("/epochs", headers=admin))
            save("open_epoch.json", client.get("/epochs/open", headers=auth["alice"]))
            save("metrics_alice_post.json", client.get("/metrics?as_of=2025-01-31T00:00:00Z", headers=auth["alice"]))

        platform.close()


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent.parent / "frontend" / "fixtures"
    main(target)
