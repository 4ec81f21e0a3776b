"""Command line interface.

Subcommands: serve, validate, train, chat, cluster, escalations list|resolve.
Exit codes: 0 ok, 2 configuration or usage error, 3 invalid workspace.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .escalation import (
    AlreadyResolvedError,
    EscalationNotFoundError,
    EscalationQueue,
    UnknownIntentError,
    resolve_escalation,
)
from .kb import MalformedKBError, load_kb_file
from .nlu import train, validate_workspace
from .pipeline import SessionStore, handle_message
from .service import InvalidWorkspaceError, ServiceConfig, create_app
from .students import (
    FeatureSpace,
    ProfileStore,
    TooFewDistinctPointsError,
    cluster_students,
)
from .workspace import WorkspaceFormatError, load_workspace

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVALID_WORKSPACE = 3


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (WorkspaceFormatError, InvalidWorkspaceError) as exc:
        print(f"invalid workspace: {exc}", file=sys.stderr)
        return EXIT_INVALID_WORKSPACE
    except (
        FileNotFoundError,
        MalformedKBError,
        TooFewDistinctPointsError,
        EscalationNotFoundError,
        AlreadyResolvedError,
        UnknownIntentError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pvta",
        description="Personalized virtual teaching assistant for course Q&A.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    _add_workspace_arg(serve)
    _add_kb_arg(serve)
    _add_data_dir_arg(serve)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--threshold", type=float, default=0.6, help="escalation threshold")
    serve.add_argument("--alpha", type=float, default=1.0, help="Laplace smoothing constant")
    serve.add_argument("--admin-token", default=None, help="token for TA/admin endpoints")
    serve.set_defaults(func=cmd_serve)

    validate = sub.add_parser("validate", help="check a workspace file")
    _add_workspace_arg(validate)
    validate.set_defaults(func=cmd_validate)

    train_cmd = sub.add_parser("train", help="train offline and report model stats")
    _add_workspace_arg(train_cmd)
    train_cmd.add_argument("--alpha", type=float, default=1.0)
    train_cmd.set_defaults(func=cmd_train)

    chat = sub.add_parser("chat", help="interactive terminal session (in-process)")
    _add_workspace_arg(chat)
    _add_kb_arg(chat)
    chat.add_argument("--data-dir", type=Path, default=None,
                      help="persist escalations and profiles here (optional)")
    chat.add_argument("--student", default="cli-student")
    chat.add_argument("--threshold", type=float, default=0.6)
    chat.add_argument("--alpha", type=float, default=1.0)
    chat.set_defaults(func=cmd_chat)

    cluster = sub.add_parser("cluster", help="cluster student profiles")
    _add_workspace_arg(cluster)
    _add_data_dir_arg(cluster)
    cluster.add_argument("--k", type=int, default=3)
    cluster.add_argument("--seed", type=int, default=0)
    cluster.set_defaults(func=cmd_cluster)

    escalations = sub.add_parser("escalations", help="inspect or resolve the TA queue")
    esc_sub = escalations.add_subparsers(dest="escalation_command", required=True)

    esc_list = esc_sub.add_parser("list", help="list pending items")
    _add_data_dir_arg(esc_list)
    esc_list.set_defaults(func=cmd_escalations_list)

    esc_resolve = esc_sub.add_parser("resolve", help="resolve one pending item")
    _add_data_dir_arg(esc_resolve)
    _add_workspace_arg(esc_resolve)
    esc_resolve.add_argument("id", help="escalation id, e.g. esc-1")
    esc_resolve.add_argument("--final-answer", required=True)
    esc_resolve.add_argument("--corrected-intent", required=True)
    esc_resolve.set_defaults(func=cmd_escalations_resolve)

    return parser


def _add_workspace_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workspace", type=Path, required=True, help="workspace JSON file")


def _add_kb_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kb", type=Path, required=True, help="knowledge base JSON file")


def _add_data_dir_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data-dir", type=Path, required=True, help="event log directory")


def cmd_serve(args) -> int:
    import uvicorn

    config = ServiceConfig(
        workspace_path=args.workspace,
        kb_path=args.kb,
        data_dir=args.data_dir,
        threshold=args.threshold,
        alpha=args.alpha,
        host=args.host,
        port=args.port,
        admin_token=args.admin_token,
    )
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return EXIT_OK


def cmd_validate(args) -> int:
    workspace = load_workspace(args.workspace)
    violations = validate_workspace(workspace)
    if violations:
        for v in violations:
            print(v)
        return EXIT_INVALID_WORKSPACE
    print(
        f"ok: {len(workspace.intents)} intents, {workspace.example_count()} examples, "
        f"{len(workspace.entities)} entities, {len(workspace.dialog_nodes)} dialog nodes"
    )
    return EXIT_OK


def cmd_train(args) -> int:
    workspace = load_workspace(args.workspace)
    violations = validate_workspace(workspace)
    if violations:
        raise InvalidWorkspaceError(violations)
    model = train(workspace, args.alpha)
    print(
        f"trained: {len(model.example_counts)} intents, {model.total_examples()} examples, "
        f"vocabulary {len(model.vocabulary)} tokens, alpha {model.alpha}"
    )
    return EXIT_OK


def cmd_chat(args) -> int:
    workspace = load_workspace(args.workspace)
    violations = validate_workspace(workspace)
    if violations:
        raise InvalidWorkspaceError(violations)
    kb = load_kb_file(args.kb)
    model = train(workspace, args.alpha)
    if args.data_dir is not None:
        args.data_dir.mkdir(parents=True, exist_ok=True)
        queue = EscalationQueue(args.data_dir / "escalations.jsonl")
        profiles = ProfileStore(args.data_dir / "interactions.jsonl")
    else:
        queue = EscalationQueue()
        profiles = ProfileStore()
    sessions = SessionStore()
    session = sessions.create(args.student)

    print("pvta chat; empty line or Ctrl-D to quit")
    while True:
        try:
            line = input("you> ")
        except EOFError:
            print()
            break
        line = line.strip()
        if not line:
            break
        turn = handle_message(
            session, line, model, workspace, kb, args.threshold,
            queue=queue, profiles=profiles,
        )
        if turn.pending:
            print(f"bot> (forwarded to a human TA as {turn.escalation_id}; answer pending)")
        else:
            print(f"bot> {turn.answer}")
        print(f"     [{turn.classification.top_intent} {turn.confidence:.3f}]")
    return EXIT_OK


def cmd_cluster(args) -> int:
    workspace = load_workspace(args.workspace)
    profiles = ProfileStore(args.data_dir / "interactions.jsonl")
    space = FeatureSpace.from_workspace(workspace)
    result = cluster_students(profiles.all_profiles(), space, args.k, args.seed)
    groups: dict[int, list[str]] = {}
    for student, index in result.assignments.items():
        groups.setdefault(index, []).append(student)
    for index in sorted(groups):
        print(f"cluster {index}: {', '.join(sorted(groups[index]))}")
    print(f"inertia: {result.inertia:.6f}")
    return EXIT_OK


def cmd_escalations_list(args) -> int:
    queue = EscalationQueue(args.data_dir / "escalations.jsonl")
    items = queue.pending()
    if not items:
        print("no pending escalations")
        return EXIT_OK
    for item in items:
        print(
            f"{item.id}  student={item.student_id}  confidence={item.confidence:.3f}  "
            f"question={item.question!r}  proposed={item.proposed_intent}"
        )
    return EXIT_OK


def cmd_escalations_resolve(args) -> int:
    queue = EscalationQueue(args.data_dir / "escalations.jsonl")
    workspace = load_workspace(args.workspace)
    item = resolve_escalation(
        queue,
        args.id,
        args.final_answer,
        args.corrected_intent,
        workspace,
        workspace_path=args.workspace,
    )
    print(
        f"resolved {item.id}: example added to intent "
        f"{item.resolution.corrected_intent!r}; retrain to pick it up"
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
