"""Human-TA escalation loop.

Questions answered below the confidence threshold (or whose answer template
could not be rendered) are queued for a human teaching assistant together with
the assistant's best-effort proposed answer. The TA resolves an item with a
final answer and a corrected intent; the resolution feeds the question back
into the workspace training examples, leaving the model stale until the next
explicit retrain.

The queue persists as an append-only JSON-lines event log (created/resolved
events) and is rebuilt by replaying the log at startup.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Callable

from .workspace import Workspace, write_workspace_file

if TYPE_CHECKING:
    from .pipeline import Turn


class EscalationNotFoundError(Exception):
    pass


class AlreadyResolvedError(Exception):
    pass


class UnknownIntentError(Exception):
    pass


@dataclass
class Resolution:
    final_answer: str
    corrected_intent: str
    resolved_at: float


@dataclass
class EscalationItem:
    id: str
    session_id: str
    student_id: str
    # Preprocessed (pronoun-resolved) question, exactly what the model saw.
    question: str
    proposed_answer: str
    proposed_intent: str
    confidence: float
    created_at: float
    status: str = "pending"
    resolution: Resolution | None = None


class EscalationQueue:
    """Pending/resolved escalation items, optionally persisted as JSONL events."""

    def __init__(self, log_path: str | Path | None = None):
        self._items: dict[str, EscalationItem] = {}
        self._order: list[str] = []
        self._next_id = 1
        self._lock = threading.Lock()
        self._log_path = Path(log_path) if log_path is not None else None
        if self._log_path is not None and self._log_path.exists():
            self._replay()

    def create(
        self,
        *,
        session_id: str,
        student_id: str,
        question: str,
        proposed_answer: str,
        proposed_intent: str,
        confidence: float,
        created_at: float | None = None,
    ) -> EscalationItem:
        with self._lock:
            item = EscalationItem(
                id=f"esc-{self._next_id}",
                session_id=session_id,
                student_id=student_id,
                question=question,
                proposed_answer=proposed_answer,
                proposed_intent=proposed_intent,
                confidence=confidence,
                created_at=time.time() if created_at is None else created_at,
            )
            self._next_id += 1
            self._items[item.id] = item
            self._order.append(item.id)
            self._append_event({
                "event": "created",
                "id": item.id,
                "session_id": item.session_id,
                "student_id": item.student_id,
                "question": item.question,
                "proposed_answer": item.proposed_answer,
                "proposed_intent": item.proposed_intent,
                "confidence": item.confidence,
                "created_at": item.created_at,
            })
            return item

    def get(self, item_id: str) -> EscalationItem:
        try:
            return self._items[item_id]
        except KeyError:
            raise EscalationNotFoundError(item_id) from None

    def pending(self) -> list[EscalationItem]:
        """Pending items, oldest first."""
        return [self._items[i] for i in self._order if self._items[i].status == "pending"]

    def all_items(self) -> list[EscalationItem]:
        return [self._items[i] for i in self._order]

    def mark_resolved(
        self,
        item_id: str,
        final_answer: str,
        corrected_intent: str,
        resolved_at: float | None = None,
    ) -> EscalationItem:
        """Atomically flip one pending item to resolved; double-resolve fails."""
        with self._lock:
            item = self.get(item_id)
            if item.status == "resolved":
                raise AlreadyResolvedError(item_id)
            item.status = "resolved"
            item.resolution = Resolution(
                final_answer=final_answer,
                corrected_intent=corrected_intent,
                resolved_at=time.time() if resolved_at is None else resolved_at,
            )
            self._append_event({
                "event": "resolved",
                "id": item.id,
                "final_answer": final_answer,
                "corrected_intent": corrected_intent,
                "resolved_at": item.resolution.resolved_at,
            })
            return item

    def _append_event(self, event: dict) -> None:
        if self._log_path is None:
            return
        with open(self._log_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(event, ensure_ascii=False) + "\n")

    def _replay(self) -> None:
        assert self._log_path is not None
        for line in self._log_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError:
                # A crash can leave a torn final line; ignore it.
                continue
            if event.get("event") == "created":
                item = EscalationItem(
                    id=event["id"],
                    session_id=event["session_id"],
                    student_id=event["student_id"],
                    question=event["question"],
                    proposed_answer=event["proposed_answer"],
                    proposed_intent=event["proposed_intent"],
                    confidence=event["confidence"],
                    created_at=event["created_at"],
                )
                self._items[item.id] = item
                self._order.append(item.id)
                number = int(item.id.rsplit("-", 1)[1])
                self._next_id = max(self._next_id, number + 1)
            elif event.get("event") == "resolved":
                item = self._items.get(event["id"])
                if item is not None and item.status == "pending":
                    item.status = "resolved"
                    item.resolution = Resolution(
                        final_answer=event["final_answer"],
                        corrected_intent=event["corrected_intent"],
                        resolved_at=event["resolved_at"],
                    )


def maybe_escalate(queue: EscalationQueue, turn: "Turn", threshold: float) -> EscalationItem | None:
    """Enqueue an item iff the turn is below threshold or its render failed.

    The boundary is strict: confidence exactly equal to the threshold does
    not escalate.
    """
    if not (turn.confidence < threshold or turn.render_failed):
        return None
    return queue.create(
        session_id=turn.session_id,
        student_id=turn.student_id,
        question=turn.preprocessed_question,
        proposed_answer=turn.proposed_answer,
        proposed_intent=turn.classification.top_intent if turn.classification else "",
        confidence=turn.confidence,
        created_at=turn.timestamp,
    )


def resolve_escalation(
    queue: EscalationQueue,
    item_id: str,
    final_answer: str,
    corrected_intent: str,
    workspace: Workspace,
    *,
    workspace_path: str | Path | None = None,
    on_deliver: Callable[[EscalationItem], None] | None = None,
    resolved_at: float | None = None,
) -> EscalationItem:
    """Resolve one pending item and feed the correction back into training.

    Appends (question, corrected_intent) to the workspace examples, rewrites
    the workspace file if a path is given, then hands the resolved item to
    `on_deliver` so the final answer reaches the originating session. The
    model is stale afterwards until an explicit retrain.
    """
    item = queue.get(item_id)
    if item.status == "resolved":
        raise AlreadyResolvedError(item_id)
    if not workspace.has_intent(corrected_intent):
        raise UnknownIntentError(corrected_intent)
    item = queue.mark_resolved(item_id, final_answer, corrected_intent, resolved_at)
    workspace.add_example(corrected_intent, item.question)
    if workspace_path is not None:
        write_workspace_file(workspace, workspace_path)
    if on_deliver is not None:
        on_deliver(item)
    return item
