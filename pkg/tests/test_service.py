"""HTTP API: schemas, status codes, auth, and the retrain/resolve wiring."""

import json

import pytest
from fastapi.testclient import TestClient

from pvta.service import InvalidWorkspaceError, ServiceConfig, create_app


def make_app(course_dir, **overrides):
    config = ServiceConfig(
        workspace_path=course_dir / "workspace.json",
        kb_path=course_dir / "kb.json",
        data_dir=course_dir / "data",
        admin_token=overrides.pop("admin_token", "secret"),
        **overrides,
    )
    return create_app(config)


ADMIN = {"X-Admin-Token": "secret"}


@pytest.fixture
def client(course_dir):
    return TestClient(make_app(course_dir))


def new_session(client, student="alice"):
    return client.post("/api/sessions", json={"student_id": student}).json()["session_id"]


class TestSessionsAndMessages:
    def test_create_session(self, client):
        response = client.post("/api/sessions", json={"student_id": "alice"})
        assert response.status_code == 200
        assert set(response.json()) == {"session_id"}

    def test_two_sessions_are_distinct(self, client):
        assert new_session(client) != new_session(client)

    def test_empty_student_id_rejected(self, client):
        response = client.post("/api/sessions", json={"student_id": ""})
        assert response.status_code == 400
        assert response.json() == {"error": "bad_request"}

    def test_message_round_trip(self, client):
        sid = new_session(client)
        response = client.post(
            f"/api/sessions/{sid}/messages", json={"text": "when is the midterm exam"}
        )
        assert response.status_code == 200
        body = response.json()
        assert set(body) == {"answer", "pending", "intent", "confidence", "escalated"}
        assert body["answer"] == "The midterm exam takes place on 2024-06-12 09:00."
        assert body["intent"] == "exam_date"
        assert body["escalated"] is False and body["pending"] is False
        assert body["confidence"] > 0.6

    def test_gibberish_returns_pending_marker(self, client):
        sid = new_session(client)
        body = client.post(f"/api/sessions/{sid}/messages", json={"text": "zxqv qqq"}).json()
        assert body["escalated"] is True and body["pending"] is True
        assert body["answer"] is None

    def test_unknown_session(self, client):
        response = client.post("/api/sessions/nope/messages", json={"text": "hi"})
        assert response.status_code == 404
        assert response.json() == {"error": "unknown_session"}

    def test_malformed_body(self, client):
        sid = new_session(client)
        response = client.post(f"/api/sessions/{sid}/messages", json={"wrong": 1})
        assert response.status_code == 400
        assert response.json() == {"error": "bad_request"}

    def test_turns_mirror_history(self, client):
        sid = new_session(client)
        client.post(f"/api/sessions/{sid}/messages", json={"text": "when is the midterm exam"})
        client.post(f"/api/sessions/{sid}/messages", json={"text": "what room is it in"})
        turns = client.get(f"/api/sessions/{sid}/turns").json()
        assert [t["intent"] for t in turns] == ["exam_date", "exam_location"]
        assert turns[1]["preprocessed_question"] == "what room is midterm exam in"
        assert turns[1]["mentions"][0]["value"] == "midterm exam"

    def test_unknown_route_is_json_404(self, client):
        response = client.get("/api/nope")
        assert response.status_code == 404
        assert response.json() == {"error": "not_found"}


class TestAdminAuth:
    def test_admin_endpoints_require_token(self, client):
        assert client.get("/api/escalations").status_code == 401
        assert client.post("/api/admin/retrain").status_code == 401
        assert client.post("/api/admin/reload-kb").status_code == 401
        assert client.get("/api/students/clusters").status_code == 401
        assert client.post(
            "/api/escalations/esc-1/resolve",
            json={"final_answer": "x", "corrected_intent": "greeting"},
        ).status_code == 401

    def test_wrong_token(self, client):
        response = client.get("/api/escalations", headers={"X-Admin-Token": "nope"})
        assert response.status_code == 401
        assert response.json() == {"error": "unauthorized"}

    def test_health_is_public(self, client):
        assert client.get("/api/health").status_code == 200

    def test_cross_origin_browser_clients_allowed(self, client):
        response = client.options(
            "/api/sessions",
            headers={
                "Origin": "http://localhost:5173",
                "Access-Control-Request-Method": "POST",
                "Access-Control-Request-Headers": "content-type,x-admin-token",
            },
        )
        assert response.status_code == 200
        assert response.headers["access-control-allow-origin"] == "*"

    def test_env_var_overrides_config(self, course_dir, monkeypatch):
        monkeypatch.setenv("PVTA_ADMIN_TOKEN", "from-env")
        client = TestClient(make_app(course_dir))
        assert client.get("/api/escalations", headers=ADMIN).status_code == 401
        ok = client.get("/api/escalations", headers={"X-Admin-Token": "from-env"})
        assert ok.status_code == 200


class TestEscalationEndpoints:
    def escalate_one(self, client):
        sid = new_session(client)
        client.post(f"/api/sessions/{sid}/messages", json={"text": "zxqv qqq"})
        return sid, client.get("/api/escalations", headers=ADMIN).json()[0]

    def test_list_pending(self, client):
        _, item = self.escalate_one(client)
        assert item["status"] == "pending"
        assert item["question"] == "zxqv qqq"
        assert item["resolution"] is None

    def test_status_filter(self, client):
        self.escalate_one(client)
        assert client.get("/api/escalations?status=all", headers=ADMIN).json()
        assert client.get("/api/escalations?status=resolved", headers=ADMIN).json() == []
        bad = client.get("/api/escalations?status=weird", headers=ADMIN)
        assert bad.status_code == 400

    def test_resolve_flow_delivers_ta_turn(self, client):
        sid, item = self.escalate_one(client)
        response = client.post(
            f"/api/escalations/{item['id']}/resolve",
            headers=ADMIN,
            json={"final_answer": "Ask during office hours.", "corrected_intent": "office_hours"},
        )
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "resolved"
        assert body["resolution"]["corrected_intent"] == "office_hours"
        turns = client.get(f"/api/sessions/{sid}/turns").json()
        assert turns[-1]["author"] == "ta"
        assert turns[-1]["answer"] == "Ask during office hours."
        assert turns[-1]["escalation_id"] == item["id"]
        assert client.get("/api/escalations", headers=ADMIN).json() == []

    def test_resolve_twice_conflicts(self, client):
        _, item = self.escalate_one(client)
        payload = {"final_answer": "x", "corrected_intent": "greeting"}
        client.post(f"/api/escalations/{item['id']}/resolve", headers=ADMIN, json=payload)
        again = client.post(f"/api/escalations/{item['id']}/resolve", headers=ADMIN, json=payload)
        assert again.status_code == 409
        assert again.json() == {"error": "already_resolved"}

    def test_resolve_unknown_id(self, client):
        response = client.post(
            "/api/escalations/esc-404/resolve",
            headers=ADMIN,
            json={"final_answer": "x", "corrected_intent": "greeting"},
        )
        assert response.status_code == 404
        assert response.json() == {"error": "not_found"}

    def test_resolve_unknown_intent(self, client):
        _, item = self.escalate_one(client)
        response = client.post(
            f"/api/escalations/{item['id']}/resolve",
            headers=ADMIN,
            json={"final_answer": "x", "corrected_intent": "nope"},
        )
        assert response.status_code == 422
        assert response.json() == {"error": "unknown_intent"}


class TestAdminOperations:
    def test_health_reports_revision_and_names(self, client):
        body = client.get("/api/health").json()
        assert body["revision"] == 1
        assert "exam_date" in body["intents"]
        assert "assessment" in body["entities"]

    def test_retrain_bumps_revision_and_reports_counts(self, client):
        first = client.post("/api/admin/retrain", headers=ADMIN).json()
        second = client.post("/api/admin/retrain", headers=ADMIN).json()
        assert second["revision"] == first["revision"] + 1
        assert second["intent_count"] == first["intent_count"]
        assert second["example_count"] == first["example_count"]
        assert client.get("/api/health").json()["revision"] == second["revision"]

    def test_resolution_then_retrain_counts_one_more_example(self, client):
        sid = new_session(client)
        client.post(f"/api/sessions/{sid}/messages", json={"text": "zxqv qqq"})
        item = client.get("/api/escalations", headers=ADMIN).json()[0]
        before = client.post("/api/admin/retrain", headers=ADMIN).json()
        client.post(
            f"/api/escalations/{item['id']}/resolve",
            headers=ADMIN,
            json={"final_answer": "x", "corrected_intent": "greeting"},
        )
        after = client.post("/api/admin/retrain", headers=ADMIN).json()
        assert after["example_count"] == before["example_count"] + 1

    def test_reload_kb_picks_up_edits(self, client, course_dir):
        doc = json.loads((course_dir / "kb.json").read_text())
        doc["exams"]["midterm"]["date"] = "2031-01-01 08:00"
        (course_dir / "kb.json").write_text(json.dumps(doc))
        response = client.post("/api/admin/reload-kb", headers=ADMIN)
        assert response.status_code == 200
        assert "exams.midterm.date" in response.json()["paths"]
        sid = new_session(client)
        body = client.post(
            f"/api/sessions/{sid}/messages", json={"text": "when is the midterm exam"}
        ).json()
        assert "2031-01-01 08:00" in body["answer"]


class TestClustersEndpoint:
    def seed_profiles(self, client):
        for student, text in [
            ("ada", "when is the midterm exam"),
            ("ada", "when is the final exam"),
            ("bob", "explain matrix factorization"),
            ("bob", "explain svd"),
        ]:
            sid = new_session(client, student)
            client.post(f"/api/sessions/{sid}/messages", json={"text": text})

    def test_clusters_shape(self, client):
        self.seed_profiles(client)
        response = client.get("/api/students/clusters?k=2&seed=42", headers=ADMIN)
        assert response.status_code == 200
        body = response.json()
        assert set(body) == {"assignments", "centroids", "inertia"}
        assert set(body["assignments"]) == {"ada", "bob"}
        assert body["assignments"]["ada"] != body["assignments"]["bob"]
        assert len(body["centroids"]) == 2

    def test_same_seed_same_answer(self, client):
        self.seed_profiles(client)
        a = client.get("/api/students/clusters?k=2&seed=7", headers=ADMIN).json()
        b = client.get("/api/students/clusters?k=2&seed=7", headers=ADMIN).json()
        assert a == b

    def test_k_larger_than_distinct_profiles(self, client):
        self.seed_profiles(client)
        response = client.get("/api/students/clusters?k=50&seed=1", headers=ADMIN)
        assert response.status_code == 422
        assert response.json() == {"error": "too_few_distinct_points"}

    def test_bad_k_rejected(self, client):
        response = client.get("/api/students/clusters?k=0&seed=1", headers=ADMIN)
        assert response.status_code == 400


class TestStartup:
    def test_invalid_workspace_refuses_to_start(self, course_dir):
        doc = json.loads((course_dir / "workspace.json").read_text())
        doc["intents"].append(doc["intents"][0])
        (course_dir / "workspace.json").write_text(json.dumps(doc))
        with pytest.raises(InvalidWorkspaceError):
            make_app(course_dir)

    def test_revision_counter_survives_restart(self, course_dir):
        client = TestClient(make_app(course_dir))
        client.post("/api/admin/retrain", headers=ADMIN)
        assert client.get("/api/health").json()["revision"] == 2
        reborn = TestClient(make_app(course_dir))
        assert reborn.get("/api/health").json()["revision"] == 3
