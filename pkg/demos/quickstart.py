"""A scripted conversation with the assistant, entirely in process.

Loads the bundled recommender-systems course, trains the intent
classifier, and walks one student session through slot filling,
pronoun carryover, a context-sensitive recap, and finally the
confidence gate handing an uncertain question to a human. Run it with:

    python3 demos/quickstart.py
"""

from pathlib import Path

from pvta import SessionStore, handle_message, load_kb_file, load_workspace, train

COURSE = Path(__file__).parent.parent / "fixtures" / "recsys_course"


def main() -> None:
    workspace = load_workspace(COURSE / "workspace.json")
    kb = load_kb_file(COURSE / "kb.json")
    model = train(workspace)
    print(f"trained on {model.total_examples()} examples, "
          f"{len(model.vocabulary)} token vocabulary\n")

    session = SessionStore().create("demo-student")
    questions = [
        "when is the midterm exam",
        "what room is it in",          # "it" refers back to the midterm exam
        "explain matrix factorization",
        "what did we just discuss",    # answered from conversation context
        "when is the project due",
    ]
    for text in questions:
        turn = handle_message(session, text, model, workspace, kb, threshold=0.6)
        print(f"student> {text}")
        if turn.preprocessed_question != text.lower():
            print(f"         (heard as: {turn.preprocessed_question})")
        if turn.pending:
            print("bot>     (forwarded to a human teaching assistant)")
        else:
            print(f"bot>     {turn.answer}")
        print(f"         [{turn.classification.top_intent} "
              f"{turn.confidence:.3f} via {turn.matched_node_id}]\n")


if __name__ == "__main__":
    main()
