"""HTTP service: sessions, messages, TA console, admin, clustering.

All state that must survive a restart lives on disk: the workspace file
(rewritten atomically on every TA resolution), the escalation and interaction
event logs, and the model revision counter in meta.json. Sessions are
in-memory only.

The serving path never sees a half-updated world: each retrain publishes an
immutable (model, workspace snapshot) pair in one reference swap, so TA
resolutions can mutate the authoring workspace without breaking in-flight
messages, and the model only goes stale relative to serving when a retrain
publishes the next pair.
"""

from __future__ import annotations

import copy
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Header, Query
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field
from starlette.exceptions import HTTPException as StarletteHTTPException

from .escalation import (
    AlreadyResolvedError,
    EscalationItem,
    EscalationNotFoundError,
    EscalationQueue,
    UnknownIntentError,
    resolve_escalation,
)
from .kb import load_kb_file
from .nlu import train, validate_workspace
from .pipeline import (
    SessionStore,
    Turn,
    UnknownSessionError,
    deliver_ta_answer,
    handle_message,
)
from .students import (
    FeatureSpace,
    ProfileStore,
    TooFewDistinctPointsError,
    cluster_students,
)
from .workspace import load_workspace


class InvalidWorkspaceError(Exception):
    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


@dataclass
class ServiceConfig:
    workspace_path: Path
    kb_path: Path
    data_dir: Path
    threshold: float = 0.6
    alpha: float = 1.0
    cluster_k: int = 3
    host: str = "127.0.0.1"
    port: int = 8000
    admin_token: str | None = None


class AppState:
    """Everything behind the routes; usable directly for in-process tests."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        # Env var wins over configured token; empty/unset keeps the config value.
        self.admin_token = os.environ.get("PVTA_ADMIN_TOKEN") or config.admin_token
        config.data_dir.mkdir(parents=True, exist_ok=True)

        self.workspace = load_workspace(config.workspace_path)
        violations = validate_workspace(self.workspace)
        if violations:
            raise InvalidWorkspaceError(violations)
        self.kb = load_kb_file(config.kb_path)
        self.queue = EscalationQueue(config.data_dir / "escalations.jsonl")
        self.profiles = ProfileStore(config.data_dir / "interactions.jsonl")
        self.sessions = SessionStore()
        self._meta_path = config.data_dir / "meta.json"
        # Serializes workspace mutation, file rewrite, and retraining.
        self._author_lock = threading.Lock()
        self.retrain()

    @property
    def published(self) -> tuple:
        """The (model, workspace snapshot) pair messages are served from."""
        return self._published

    def retrain(self) -> dict:
        with self._author_lock:
            model = train(self.workspace, self.config.alpha, revision=self._next_revision())
            snapshot = copy.deepcopy(self.workspace)
            self._published = (model, snapshot)
            return {
                "revision": model.revision,
                "intent_count": len(snapshot.intents),
                "example_count": snapshot.example_count(),
            }

    def reload_kb(self) -> list[str]:
        self.kb = load_kb_file(self.config.kb_path)
        return self.kb.paths()

    def post_message(self, session_id: str, text: str) -> Turn:
        session = self.sessions.get(session_id)
        model, workspace = self._published
        with self.sessions.lock_for(session_id):
            return handle_message(
                session,
                text,
                model,
                workspace,
                self.kb,
                self.config.threshold,
                queue=self.queue,
                profiles=self.profiles,
            )

    def resolve(self, item_id: str, final_answer: str, corrected_intent: str) -> EscalationItem:
        with self._author_lock:
            return resolve_escalation(
                self.queue,
                item_id,
                final_answer,
                corrected_intent,
                self.workspace,
                workspace_path=self.config.workspace_path,
                on_deliver=self._deliver,
            )

    def cluster(self, k: int, seed: int):
        _, workspace = self._published
        space = FeatureSpace.from_workspace(workspace)
        return cluster_students(self.profiles.all_profiles(), space, k, seed)

    def _deliver(self, item: EscalationItem) -> None:
        # The originating session is gone after a restart; the answer then
        # remains visible on the resolved escalation item only.
        try:
            session = self.sessions.get(item.session_id)
        except UnknownSessionError:
            return
        with self.sessions.lock_for(item.session_id):
            deliver_ta_answer(session, item.resolution.final_answer, item.id)

    def _next_revision(self) -> int:
        last = 0
        if self._meta_path.exists():
            last = int(json.loads(self._meta_path.read_text(encoding="utf-8"))["model_revision"])
        revision = last + 1
        tmp = self._meta_path.with_name(self._meta_path.name + ".tmp")
        tmp.write_text(json.dumps({"model_revision": revision}) + "\n", encoding="utf-8")
        os.replace(tmp, self._meta_path)
        return revision


def turn_to_json(turn: Turn) -> dict:
    return {
        "author": turn.author,
        "raw_question": turn.raw_question,
        "preprocessed_question": turn.preprocessed_question,
        "intent": turn.classification.top_intent if turn.classification else None,
        "confidence": turn.confidence,
        "mentions": [
            {"entity": m.entity, "value": m.value, "surface": m.surface, "span": list(m.span)}
            for m in turn.mentions
        ],
        "matched_node_id": turn.matched_node_id,
        "answer": turn.answer,
        "pending": turn.pending,
        "escalated": turn.escalated,
        "escalation_id": turn.escalation_id,
        "timestamp": turn.timestamp,
    }


def item_to_json(item: EscalationItem) -> dict:
    return {
        "id": item.id,
        "session_id": item.session_id,
        "student_id": item.student_id,
        "question": item.question,
        "proposed_answer": item.proposed_answer,
        "proposed_intent": item.proposed_intent,
        "confidence": item.confidence,
        "status": item.status,
        "created_at": item.created_at,
        "resolution": None
        if item.resolution is None
        else {
            "final_answer": item.resolution.final_answer,
            "corrected_intent": item.resolution.corrected_intent,
            "resolved_at": item.resolution.resolved_at,
        },
    }


class CreateSessionBody(BaseModel):
    student_id: str = Field(min_length=1)


class MessageBody(BaseModel):
    text: str


class ResolveBody(BaseModel):
    final_answer: str = Field(min_length=1)
    corrected_intent: str = Field(min_length=1)


def create_app(config: ServiceConfig) -> FastAPI:
    state = AppState(config)
    app = FastAPI(title="pvta", docs_url=None, redoc_url=None)
    app.state.pvta = state
    # The browser front end is served from its own origin during development.
    # Auth is a header token with no cookies, so a wildcard is safe here.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def require_admin(token: str | None) -> JSONResponse | None:
        if state.admin_token is not None and token != state.admin_token:
            return JSONResponse({"error": "unauthorized"}, status_code=401)
        return None

    @app.exception_handler(RequestValidationError)
    async def on_bad_body(request, exc):
        return JSONResponse({"error": "bad_request"}, status_code=400)

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(request, exc):
        code = str(exc.detail).lower().replace(" ", "_")
        return JSONResponse({"error": code}, status_code=exc.status_code)

    @app.exception_handler(UnknownSessionError)
    async def on_unknown_session(request, exc):
        return JSONResponse({"error": "unknown_session"}, status_code=404)

    @app.exception_handler(EscalationNotFoundError)
    async def on_escalation_missing(request, exc):
        return JSONResponse({"error": "not_found"}, status_code=404)

    @app.exception_handler(AlreadyResolvedError)
    async def on_already_resolved(request, exc):
        return JSONResponse({"error": "already_resolved"}, status_code=409)

    @app.exception_handler(UnknownIntentError)
    async def on_unknown_intent(request, exc):
        return JSONResponse({"error": "unknown_intent"}, status_code=422)

    @app.exception_handler(TooFewDistinctPointsError)
    async def on_too_few_points(request, exc):
        return JSONResponse({"error": "too_few_distinct_points"}, status_code=422)

    @app.post("/api/sessions")
    def create_session(body: CreateSessionBody):
        session = state.sessions.create(body.student_id)
        return {"session_id": session.session_id}

    @app.post("/api/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        turn = state.post_message(session_id, body.text)
        return {
            "answer": turn.answer,
            "pending": turn.pending,
            "intent": turn.classification.top_intent,
            "confidence": turn.confidence,
            "escalated": turn.escalated,
        }

    @app.get("/api/sessions/{session_id}/turns")
    def get_turns(session_id: str):
        session = state.sessions.get(session_id)
        return [turn_to_json(t) for t in list(session.history)]

    @app.get("/api/escalations")
    def list_escalations(
        status: str = Query("pending"),
        x_admin_token: str | None = Header(None, alias="X-Admin-Token"),
    ):
        denied = require_admin(x_admin_token)
        if denied is not None:
            return denied
        if status == "pending":
            items = state.queue.pending()
        elif status == "resolved":
            items = [i for i in state.queue.all_items() if i.status == "resolved"]
        elif status == "all":
            items = state.queue.all_items()
        else:
            return JSONResponse({"error": "bad_request"}, status_code=400)
        return [item_to_json(i) for i in items]

    @app.post("/api/escalations/{item_id}/resolve")
    def resolve_item(
        item_id: str,
        body: ResolveBody,
        x_admin_token: str | None = Header(None, alias="X-Admin-Token"),
    ):
        denied = require_admin(x_admin_token)
        if denied is not None:
            return denied
        item = state.resolve(item_id, body.final_answer, body.corrected_intent)
        return item_to_json(item)

    @app.post("/api/admin/retrain")
    def retrain(x_admin_token: str | None = Header(None, alias="X-Admin-Token")):
        denied = require_admin(x_admin_token)
        if denied is not None:
            return denied
        return state.retrain()

    @app.post("/api/admin/reload-kb")
    def reload_kb(x_admin_token: str | None = Header(None, alias="X-Admin-Token")):
        denied = require_admin(x_admin_token)
        if denied is not None:
            return denied
        return {"paths": state.reload_kb()}

    @app.get("/api/students/clusters")
    def clusters(
        k: int | None = Query(None, ge=1),
        seed: int = Query(0),
        x_admin_token: str | None = Header(None, alias="X-Admin-Token"),
    ):
        denied = require_admin(x_admin_token)
        if denied is not None:
            return denied
        result = state.cluster(k if k is not None else state.config.cluster_k, seed)
        return {
            "assignments": result.assignments,
            "centroids": [[float(x) for x in row] for row in result.centroids],
            "inertia": result.inertia,
        }

    @app.get("/api/health")
    def health():
        model, workspace = state.published
        return {
            "revision": model.revision,
            "intents": workspace.intent_names(),
            "entities": workspace.entity_names(),
        }

    return app
