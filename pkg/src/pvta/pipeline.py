"""Per-question orchestration and session state.

One message flows through: pronoun resolution (the classifier has no memory,
so references like "it" are rewritten to the last mentioned concept before
classification), tokenization, intent classification, entity extraction,
dialog node matching, template rendering, and finally the escalation gate.
Low confidence or a failed render both hand the question to a human TA; the
student immediately receives a pending marker and the TA's answer is delivered
into the session as a separate turn later.
"""

from __future__ import annotations

import re
import threading
import time
import uuid
from dataclasses import dataclass, field

from .dialog import RenderFailure, compute_context_updates, match_node, render_template
from .escalation import EscalationQueue, maybe_escalate
from .kb import CourseKB
from .nlu import Classification, EntityMention, TrainedModel, classify, extract_entities, normalize
from .workspace import Workspace


class UnknownSessionError(Exception):
    pass


class StaleModelError(Exception):
    """The model was trained from a different workspace revision than the one given."""

    def __init__(self, model_revision: int, workspace_revision: int):
        super().__init__(
            f"model trained from workspace revision {model_revision}, "
            f"current revision is {workspace_revision}; retrain required"
        )
        self.model_revision = model_revision
        self.workspace_revision = workspace_revision


@dataclass
class Turn:
    """One processed exchange. `answer` is None while a TA answer is pending."""

    session_id: str
    student_id: str
    raw_question: str
    preprocessed_question: str
    classification: Classification | None
    mentions: list[EntityMention]
    matched_node_id: str | None
    answer: str | None
    proposed_answer: str
    confidence: float
    escalated: bool
    render_failed: bool
    author: str  # "assistant" or "ta"
    escalation_id: str | None
    timestamp: float

    @property
    def pending(self) -> bool:
        return self.escalated and self.answer is None


@dataclass
class Session:
    session_id: str
    student_id: str
    context: dict[str, str] = field(default_factory=dict)
    last_entity_mention: EntityMention | None = None
    history: list[Turn] = field(default_factory=list)


class SessionStore:
    """In-memory sessions with a per-session lock for serialized handling."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def create(self, student_id: str) -> Session:
        if not student_id:
            raise ValueError("student_id must be non-empty")
        session = Session(session_id=uuid.uuid4().hex, student_id=student_id)
        with self._guard:
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(session_id) from None

    def lock_for(self, session_id: str) -> threading.Lock:
        self.get(session_id)
        return self._locks[session_id]


DEFAULT_PRONOUNS = ("it", "that", "this", "them")


def resolve_pronouns(
    session: Session, text: str, pronouns: tuple[str, ...] = DEFAULT_PRONOUNS
) -> str:
    """Replace standalone pronoun tokens with the last mentioned surface form.

    Whole tokens only: "that's" is left alone. Without a prior entity mention
    the text passes through unchanged.
    """
    if session.last_entity_mention is None:
        return text
    surface = session.last_entity_mention.surface
    alternatives = "|".join(re.escape(p) for p in pronouns)
    pattern = re.compile(rf"(?<![\w'])(?:{alternatives})(?![\w'])", re.IGNORECASE)
    return pattern.sub(surface, text)


def handle_message(
    session: Session,
    text: str,
    model: TrainedModel,
    workspace: Workspace,
    kb: CourseKB,
    threshold: float,
    *,
    queue: EscalationQueue | None = None,
    profiles=None,
    now: float | None = None,
) -> Turn:
    """Process one student question end to end and append the turn.

    `profiles`, when given, must expose record(turn); `queue`, when given,
    receives an EscalationItem for every escalated turn.
    """
    if model.workspace_revision != workspace.revision:
        raise StaleModelError(model.workspace_revision, workspace.revision)

    preprocessed = resolve_pronouns(session, text)
    tokens = normalize(preprocessed)
    classification = classify(model, tokens)
    mentions = extract_entities(workspace, tokens)
    node = match_node(workspace.dialog_nodes, classification, mentions, session.context)

    render_failed = False
    rendered = ""
    try:
        rendered = render_template(node.response, kb, mentions, session.context)
    except RenderFailure:
        render_failed = True

    escalated = classification.top_confidence < threshold or render_failed
    turn = Turn(
        session_id=session.session_id,
        student_id=session.student_id,
        raw_question=text,
        preprocessed_question=preprocessed,
        classification=classification,
        mentions=mentions,
        matched_node_id=node.id,
        answer=None if escalated else rendered,
        proposed_answer=rendered if escalated else "",
        confidence=classification.top_confidence,
        escalated=escalated,
        render_failed=render_failed,
        author="assistant",
        escalation_id=None,
        timestamp=time.time() if now is None else now,
    )
    if escalated and queue is not None:
        item = maybe_escalate(queue, turn, threshold)
        if item is not None:
            turn.escalation_id = item.id

    # Templates see pre-turn context; updates land afterwards.
    session.context.update(compute_context_updates(node, kb, mentions, session.context))
    if mentions:
        session.last_entity_mention = mentions[-1]
    session.history.append(turn)
    if profiles is not None:
        profiles.record(turn)
    return turn


def deliver_ta_answer(
    session: Session, final_answer: str, escalation_id: str, now: float | None = None
) -> Turn:
    """Append the TA's final answer to the originating session."""
    turn = Turn(
        session_id=session.session_id,
        student_id=session.student_id,
        raw_question="",
        preprocessed_question="",
        classification=None,
        mentions=[],
        matched_node_id=None,
        answer=final_answer,
        proposed_answer="",
        confidence=1.0,
        escalated=False,
        render_failed=False,
        author="ta",
        escalation_id=escalation_id,
        timestamp=time.time() if now is None else now,
    )
    session.history.append(turn)
    return turn
