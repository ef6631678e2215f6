"""HTTP surface: auth, submission lifecycle, metrics, statements."""

from __future__ import annotations

import io
import time
from datetime import timedelta

import pytest
from fastapi.testclient import TestClient

from tokenshare.config import PlatformConfig
from tokenshare.core import Platform
from tokenshare.dedup import exact_fingerprint, minhash_signature, write_fingerprint_file
from tokenshare.preprocess import normalize
from tokenshare.service import create_app

from conftest import EPOCH_START, FakeClock, jsonl, words


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def service(tmp_path, clock):
    platform, admin_token = Platform.initialize(tmp_path / "data", PlatformConfig(), clock=clock)
    app = create_app(platform)
    with TestClient(app) as client:
        client.admin = {"Authorization": f"Bearer {admin_token}"}
        client.platform = platform
        yield client
    platform.close()


@pytest.fixture
def manual_service(tmp_path, clock):
    """Service without the background worker; processing is explicit."""
    platform, admin_token = Platform.initialize(tmp_path / "data", PlatformConfig(), clock=clock)
    app = create_app(platform, auto_process=False)
    with TestClient(app) as client:
        client.admin = {"Authorization": f"Bearer {admin_token}"}
        client.platform = platform
        yield client
    platform.close()


def register(client, name: str) -> dict:
    response = client.post("/contributors", json={"display_name": name})
    assert response.status_code == 201
    body = response.json()
    body["headers"] = {"Authorization": f"Bearer {body['api_token']}"}
    return body


def wait_finalized(client, headers, submission_id: str, timeout: float = 5.0) -> dict:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        state = client.get(f"/submissions/{submission_id}", headers=headers).json()
        if state["status"] in ("finalized", "failed"):
            return state
        time.sleep(0.01)
    raise AssertionError(f"submission {submission_id} did not finish in time")


class TestContributors:
    def test_register_created(self, service):
        body = register(service, "alice")
        assert body["contributor_id"].startswith("c")
        assert len(body["api_token"]) == 32

    def test_duplicate_name_conflict(self, service):
        register(service, "alice")
        response = service.post("/contributors", json={"display_name": "alice"})
        assert response.status_code == 409
        assert response.json()["code"] == "conflict"

    def test_empty_name_rejected(self, service):
        assert service.post("/contributors", json={"display_name": ""}).status_code == 422
        assert service.post("/contributors", json={"display_name": "   "}).status_code == 422


class TestSubmissions:
    def test_upload_and_poll_until_finalized(self, service):
        alice = register(service, "alice")
        response = service.post("/submissions", content=jsonl(words(40)), headers=alice["headers"])
        assert response.status_code == 202
        sid = response.json()["submission_id"]
        state = wait_finalized(service, alice["headers"], sid)
        assert state["status"] == "finalized"
        report = service.get(f"/submissions/{sid}/report", headers=alice["headers"]).json()
        assert report["accepted_tokens"] == 40
        assert [s["stage"] for s in report["stages"]][-1] == "accepted"

    def test_oversized_body_413(self, tmp_path, clock):
        config = PlatformConfig(submission_size_cap=128)
        platform, _ = Platform.initialize(tmp_path / "small", config, clock=clock)
        with TestClient(create_app(platform)) as client:
            alice = register(client, "alice")
            response = client.post("/submissions", content=b"x" * 129, headers=alice["headers"])
            assert response.status_code == 413
            assert response.json()["detail"]["code"] == "payload_too_large"
        platform.close()

    def test_foreign_submission_forbidden(self, service):
        alice = register(service, "alice")
        bob = register(service, "bob")
        sid = service.post("/submissions", content=jsonl(words(40)), headers=alice["headers"]).json()[
            "submission_id"
        ]
        wait_finalized(service, alice["headers"], sid)
        assert service.get(f"/submissions/{sid}/report", headers=bob["headers"]).status_code == 403
        assert service.get(f"/submissions/{sid}/report", headers=service.admin).status_code == 200

    def test_unknown_submission_404(self, service):
        alice = register(service, "alice")
        assert service.get("/submissions/snope/report", headers=alice["headers"]).status_code == 404

    def test_pending_report_marks_stages(self, manual_service):
        alice = register(manual_service, "alice")
        sid = manual_service.post(
            "/submissions", content=jsonl(words(40)), headers=alice["headers"]
        ).json()["submission_id"]
        report = manual_service.get(f"/submissions/{sid}/report", headers=alice["headers"]).json()
        assert report["status"] == "queued"
        assert all(stage["pending"] for stage in report["stages"])
        manual_service.platform.process_pending()
        report = manual_service.get(f"/submissions/{sid}/report", headers=alice["headers"]).json()
        assert report["status"] == "finalized"

    def test_zero_parseable_records_reported_after_processing(self, service):
        alice = register(service, "alice")
        sid = service.post("/submissions", content=b"not jsonl at all", headers=alice["headers"]).json()[
            "submission_id"
        ]
        state = wait_finalized(service, alice["headers"], sid)
        assert state["status"] == "failed"
        assert state["error"] == "no parseable records"

    def test_listing_and_pagination(self, service):
        alice = register(service, "alice")
        sids = []
        for i in range(5):
            sids.append(
                service.post(
                    "/submissions", content=jsonl(words(40, f"p{i}")), headers=alice["headers"]
                ).json()["submission_id"]
            )
        wait_finalized(service, alice["headers"], sids[-1])
        page1 = service.get("/submissions?limit=2", headers=alice["headers"]).json()
        assert [s["submission_id"] for s in page1["submissions"]] == sids[:2]
        page2 = service.get(
            f"/submissions?limit=2&cursor={page1['next_cursor']}", headers=alice["headers"]
        ).json()
        assert [s["submission_id"] for s in page2["submissions"]] == sids[2:4]
        assert service.get("/submissions?cursor=@@@", headers=alice["headers"]).status_code == 422


class TestMetrics:
    def test_zero_account(self, service, clock):
        alice = register(service, "alice")
        clock.advance(days=1)
        body = service.get("/metrics", headers=alice["headers"]).json()
        assert body["metrics"] == {
            "contribution_ratio": "0",
            "contribution_token_count": 0,
            "current_monetary_reward_minor": 0,
            "expected_payout_minor": 0,
        }

    def test_quarter_ratio(self, service):
        alice = register(service, "alice")
        bob = register(service, "bob")
        s1 = service.post("/submissions", content=jsonl(words(100, "a")), headers=alice["headers"]).json()
        wait_finalized(service, alice["headers"], s1["submission_id"])
        s2 = service.post("/submissions", content=jsonl(words(300, "b")), headers=bob["headers"]).json()
        wait_finalized(service, bob["headers"], s2["submission_id"])
        body = service.get("/metrics", headers=alice["headers"]).json()
        assert body["metrics"]["contribution_ratio"] == "0.25"
        assert body["metrics"]["contribution_token_count"] == 100

    def test_admin_sees_all_contributors(self, service):
        register(service, "alice")
        register(service, "bob")
        body = service.get("/metrics", headers=service.admin).json()
        assert len(body["contributors"]) == 2

    def test_metrics_consistent_with_ledger_primitives(self, service, clock):
        from fractions import Fraction

        from tokenshare.canonical import ratio_str
        from tokenshare.payout import compute_rewards

        alice = register(service, "alice")
        bob = register(service, "bob")
        for who, count, prefix in ((alice, 120, "a"), (bob, 60, "b")):
            sid = service.post(
                "/submissions", content=jsonl(words(count, prefix)), headers=who["headers"]
            ).json()["submission_id"]
            wait_finalized(service, who["headers"], sid)
        service.post(
            "/revenue/events",
            json={
                "event_id": "r1",
                "occurred_at": "2025-01-06T00:00:00Z",
                "amount_minor": 9_000,
                "currency": "USD",
            },
            headers=service.admin,
        )
        as_of = "2025-01-11T00:00:00Z"
        body = service.get(f"/metrics?as_of={as_of}", headers=alice["headers"]).json()
        platform = service.platform
        snapshot = platform.token_snapshot()
        assert body["metrics"]["contribution_ratio"] == ratio_str(Fraction(120, 180))
        projected = 9_000 * 30 // 10  # linear extrapolation at day 10 of 30
        expected = {
            line.contributor_id: line.reward_minor
            for line in compute_rewards(snapshot, projected, 100_000)
        }
        assert body["metrics"]["expected_payout_minor"] == expected[alice["contributor_id"]]


class TestRevenueEndpoints:
    def event(self, event_id="e1", amount=250):
        return {
            "event_id": event_id,
            "occurred_at": "2025-01-05T00:00:00Z",
            "amount_minor": amount,
            "currency": "USD",
            "usage_meta": {"endpoint": "chat", "request_count": 12},
        }

    def test_accept_then_duplicate(self, service):
        assert service.post("/revenue/events", json=self.event(), headers=service.admin).json() == {
            "status": "accepted"
        }
        for _ in range(3):
            assert service.post(
                "/revenue/events", json=self.event(amount=999), headers=service.admin
            ).json() == {"status": "duplicate"}

    def test_rejections(self, service):
        bad_amount = self.event()
        bad_amount["amount_minor"] = 0
        response = service.post("/revenue/events", json=bad_amount, headers=service.admin)
        assert response.status_code == 422
        assert response.json()["code"] == "revenue_rejected"

        naive = self.event(event_id="naive")
        naive["occurred_at"] = "2025-01-05T00:00:00"  # no timezone
        assert service.post("/revenue/events", json=naive, headers=service.admin).status_code == 422

        wrong_currency = self.event(event_id="eur")
        wrong_currency["currency"] = "EUR"
        assert (
            service.post("/revenue/events", json=wrong_currency, headers=service.admin).status_code
            == 422
        )

    def test_usage_detail_consistency(self, service):
        for i in range(4):
            event = self.event(event_id=f"e{i}", amount=100 + i)
            event["occurred_at"] = f"2025-01-0{i + 2}T08:00:00Z"
            service.post("/revenue/events", json=event, headers=service.admin)
        body = service.get(
            "/revenue/usage?start=2025-01-01T00:00:00Z&end=2025-01-30T00:00:00Z",
            headers=service.admin,
        ).json()
        assert body["total_amount_minor"] == sum(b["amount_minor"] for b in body["buckets"]) == 406
        assert [b["day"] for b in body["buckets"]] == sorted(b["day"] for b in body["buckets"])

    def test_contributors_may_read_usage(self, service):
        alice = register(service, "alice")
        response = service.get(
            "/revenue/usage?start=2025-01-01T00:00:00Z&end=2025-01-02T00:00:00Z",
            headers=alice["headers"],
        )
        assert response.status_code == 200


class TestEpochEndpoints:
    def close_body(self, days=30):
        return {"close_time": (EPOCH_START + timedelta(days=days)).isoformat()}

    def test_close_and_statement_byte_stability(self, service):
        alice = register(service, "alice")
        sid = service.post("/submissions", content=jsonl(words(40)), headers=alice["headers"]).json()[
            "submission_id"
        ]
        wait_finalized(service, alice["headers"], sid)
        service.post(
            "/revenue/events",
            json={"event_id": "r", "occurred_at": "2025-01-02T00:00:00Z", "amount_minor": 5_000, "currency": "USD"},
            headers=service.admin,
        )
        first = service.post("/epochs/1/close", json=self.close_body(), headers=service.admin)
        assert first.status_code == 200
        second = service.post("/epochs/1/close", json=self.close_body(31), headers=service.admin)
        assert first.content == second.content
        statement = service.get("/epochs/1/statement", headers=service.admin)
        assert statement.content == service.get("/epochs/1/statement", headers=service.admin).content
        assert statement.json()["pool_minor"] == 500

    def test_contributor_statement_is_filtered(self, service):
        alice = register(service, "alice")
        bob = register(service, "bob")
        for who, prefix in ((alice, "a"), (bob, "b")):
            sid = service.post(
                "/submissions", content=jsonl(words(40, prefix)), headers=who["headers"]
            ).json()["submission_id"]
            wait_finalized(service, who["headers"], sid)
        service.post("/epochs/1/close", json=self.close_body(), headers=service.admin)
        full = service.get("/epochs/1/statement", headers=service.admin).json()
        assert len(full["lines"]) == 2
        own = service.get("/epochs/1/statement", headers=alice["headers"]).json()
        assert [line["contributor_id"] for line in own["lines"]] == [alice["contributor_id"]]

    def test_open_epoch_statement_conflict(self, service):
        assert service.get("/epochs/1/statement", headers=service.admin).status_code == 409

    def test_epoch_list_and_open(self, service):
        service.post("/epochs/1/close", json=self.close_body(), headers=service.admin)
        body = service.get("/epochs", headers=service.admin).json()
        assert [e["epoch_id"] for e in body["epochs"]] == [1, 2]
        assert service.get("/epochs/open", headers=service.admin).json()["epoch_id"] == 2

    def test_close_rejects_contributor(self, service):
        alice = register(service, "alice")
        response = service.post("/epochs/1/close", json=self.close_body(), headers=alice["headers"])
        assert response.status_code == 403


class TestCorpusEndpoint:
    def test_load_corpus_and_dedup(self, service):
        text = words(40)
        normalized = normalize(text)
        params = service.platform.config.minhash
        buffer = io.BytesIO()
        write_fingerprint_file(
            buffer, params, [(exact_fingerprint(normalized), minhash_signature(normalized, params))]
        )
        response = service.post("/corpus", content=buffer.getvalue(), headers=service.admin)
        assert response.status_code == 200
        assert response.json() == {"source": "consumer_corpus", "entries_added": 1}

        alice = register(service, "alice")
        sid = service.post("/submissions", content=jsonl(text), headers=alice["headers"]).json()[
            "submission_id"
        ]
        wait_finalized(service, alice["headers"], sid)
        report = service.get(f"/submissions/{sid}/report", headers=alice["headers"]).json()
        assert report["rejections"] == {"consumer_duplicate": 1}

    def test_bad_fingerprint_file(self, service):
        response = service.post("/corpus", content=b"garbage", headers=service.admin)
        assert response.status_code == 422


class TestConfigEndpoints:
    def test_get_config(self, service):
        alice = register(service, "alice")
        body = service.get("/config", headers=alice["headers"]).json()
        assert body["currency_code"] == "USD"
        assert body["minhash"]["num_perms"] == 128

    def test_set_alpha_admin_only(self, service):
        assert (
            service.post("/config/alpha", json={"alpha_ppm": 200_000}, headers=service.admin).json()[
                "applies_from_epoch"
            ]
            == 2
        )
        alice = register(service, "alice")
        assert (
            service.post("/config/alpha", json={"alpha_ppm": 1}, headers=alice["headers"]).status_code
            == 403
        )

    def test_alpha_out_of_range(self, service):
        response = service.post("/config/alpha", json={"alpha_ppm": 2_000_000}, headers=service.admin)
        assert response.status_code == 422


AUTH_MATRIX = [
    # (method, path, needs_body, anon, contributor, admin)
    ("POST", "/contributors", "unique_name", 201, 201, 201),  # registration is public
    ("POST", "/submissions", b"", 401, 202, 403),
    ("GET", "/submissions", None, 401, 200, 200),
    ("GET", "/metrics", None, 401, 200, 200),
    ("GET", "/revenue/usage?start=2025-01-01T00:00:00Z&end=2025-01-02T00:00:00Z", None, 401, 200, 200),
    ("POST", "/revenue/events", {"event_id": "x", "occurred_at": "2025-01-02T00:00:00Z", "amount_minor": 5, "currency": "USD"}, 401, 403, 200),
    ("GET", "/epochs", None, 401, 200, 200),
    ("GET", "/epochs/open", None, 401, 200, 200),
    ("POST", "/epochs/1/close", {"override": True, "close_time": "2025-01-02T00:00:00Z"}, 401, 403, 200),
    ("POST", "/corpus", b"", 401, 403, 422),  # admin passes auth, fails file parse
    ("POST", "/config/alpha", {"alpha_ppm": 5}, 401, 403, 200),
    ("GET", "/config", None, 401, 200, 200),
]


class TestAuthorizationMatrix:
    @pytest.mark.parametrize("method,path,body,anon,contributor,admin", AUTH_MATRIX)
    def test_role_enforcement(self, service, method, path, body, anon, contributor, admin):
        alice = register(service, "alice")

        counter = iter(range(100))

        def call(headers):
            kwargs = {"headers": headers} if headers else {}
            if body == "unique_name":
                kwargs["json"] = {"display_name": f"fresh-{next(counter)}"}
            elif isinstance(body, bytes):
                kwargs["content"] = body
            elif body is not None:
                kwargs["json"] = dict(body) if isinstance(body, dict) else body
            return service.request(method, path, **kwargs)

        # submission uploads need fresh valid bodies per principal
        payload = jsonl(words(40)) if path == "/submissions" else None
        if payload is not None:
            assert service.request(method, path, content=payload).status_code == anon
            assert (
                service.request(method, path, content=payload, headers=alice["headers"]).status_code
                == contributor
            )
            assert (
                service.request(method, path, content=payload, headers=service.admin).status_code
                == admin
            )
            return
        assert call(None).status_code == anon
        assert call(alice["headers"]).status_code == contributor
        assert call(service.admin).status_code == admin

    def test_bogus_token_unauthorized(self, service):
        response = service.get("/metrics", headers={"Authorization": "Bearer ffff"})
        assert response.status_code == 401
        response = service.get("/metrics", headers={"Authorization": "Basic ffff"})
        assert response.status_code == 401

    def test_read_endpoints_are_repeat_safe(self, service):
        alice = register(service, "alice")
        before = service.platform.log.last_seq
        for _ in range(3):
            service.get("/metrics", headers=alice["headers"])
            service.get("/epochs", headers=alice["headers"])
            service.get("/submissions", headers=alice["headers"])
        assert service.platform.log.last_seq == before
