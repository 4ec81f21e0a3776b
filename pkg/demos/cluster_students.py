"""Group students by what they ask about.

Simulates six students with different interests, accumulates their
interaction profiles from real pipeline turns, then runs seeded k-means
over the normalized profile vectors. Exam-focused students and
topic-focused students end up in different groups regardless of seed.
"""

from pathlib import Path

from pvta import (
    FeatureSpace,
    ProfileStore,
    SessionStore,
    cluster_students,
    handle_message,
    load_kb_file,
    load_workspace,
    train,
)

COURSE = Path(__file__).parent.parent / "fixtures" / "recsys_course"

TRANSCRIPTS = {
    "ada": ["when is the midterm exam", "when is the final exam",
            "what room is the midterm exam in"],
    "ben": ["when is the exam", "how is the course graded"],
    "cal": ["when is the midterm exam", "what room is it in"],
    "dee": ["explain matrix factorization", "what is collaborative filtering"],
    "eva": ["can you explain svd", "explain matrix factorization"],
    "fay": ["what is collaborative filtering", "which book should i read"],
}


def main() -> None:
    workspace = load_workspace(COURSE / "workspace.json")
    kb = load_kb_file(COURSE / "kb.json")
    model = train(workspace)
    sessions = SessionStore()
    profiles = ProfileStore()

    for student, questions in TRANSCRIPTS.items():
        session = sessions.create(student)
        for text in questions:
            handle_message(
                session, text, model, workspace, kb, 0.6, profiles=profiles
            )

    for profile in profiles.all_profiles():
        top = sorted(profile.intent_counts.items(), key=lambda kv: -kv[1])
        print(f"{profile.student_id}: {dict(top)}")

    space = FeatureSpace.from_workspace(workspace)
    result = cluster_students(profiles.all_profiles(), space, k=2, seed=42)
    print(f"\nk-means (k=2, seed=42), inertia {result.inertia:.4f}:")
    groups: dict[int, list[str]] = {}
    for student, index in result.assignments.items():
        groups.setdefault(index, []).append(student)
    for index in sorted(groups):
        print(f"  group {index}: {', '.join(sorted(groups[index]))}")


if __name__ == "__main__":
    main()
