"""The human-in-the-loop feedback cycle, end to end.

A phrasing the classifier has never seen comes in below the confidence
threshold, so instead of answering the bot files it in the TA queue. A
(simulated) teaching assistant resolves it with the right answer and the
right intent label; that adds one training example to the workspace.
After a retrain the same phrasing is answered confidently.

The demo copies the course files into a temporary directory because a
resolution rewrites the workspace on disk.
"""

import shutil
import tempfile
from pathlib import Path

from pvta import (
    EscalationQueue,
    SessionStore,
    handle_message,
    load_kb_file,
    load_workspace,
    resolve_escalation,
    train,
)

COURSE = Path(__file__).parent.parent / "fixtures" / "recsys_course"
QUESTION = "where should i go for the midterm"


def show(label, turn):
    print(f"{label}: intent={turn.classification.top_intent} "
          f"confidence={turn.confidence:.4f} escalated={turn.escalated}")
    if turn.answer is not None:
        print(f"       answer: {turn.answer}")


def main() -> None:
    workdir = Path(tempfile.mkdtemp(prefix="pvta-demo-"))
    ws_path = workdir / "workspace.json"
    shutil.copy(COURSE / "workspace.json", ws_path)
    shutil.copy(COURSE / "kb.json", workdir / "kb.json")

    workspace = load_workspace(ws_path)
    kb = load_kb_file(workdir / "kb.json")
    model = train(workspace)
    queue = EscalationQueue(workdir / "escalations.jsonl")
    sessions = SessionStore()

    print(f"student asks: {QUESTION!r}\n")
    turn = handle_message(
        sessions.create("alice"), QUESTION, model, workspace, kb, 0.6, queue=queue
    )
    show("before", turn)
    item = queue.get(turn.escalation_id)
    print(f"       queued for a human TA as {item.id} "
          f"(proposed intent {item.proposed_intent!r} was below threshold)\n")

    print("TA resolves the item with the correct intent label...")
    resolve_escalation(
        queue,
        item.id,
        "The midterm exam is held in room B.4.23.",
        "exam_location",
        workspace,
        workspace_path=ws_path,
    )
    print(f"       workspace now holds {workspace.example_count()} examples "
          f"(one more than before)\n")

    model = train(workspace)
    turn = handle_message(
        sessions.create("bob"), QUESTION, model, workspace, kb, 0.6, queue=queue
    )
    show("after", turn)

    shutil.rmtree(workdir)


if __name__ == "__main__":
    main()
