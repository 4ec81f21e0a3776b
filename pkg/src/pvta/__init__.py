"""Personalized virtual teaching assistant for course Q&A.

A self-hosted stand-in for commercial assistant platforms: a trainable intent
classifier with confidence scores, dictionary-based entity extraction, a
rule-based dialog layer that completes answers from a course knowledge base,
confidence-gated escalation to a human TA whose corrections grow the training
set, and k-means clustering of student behavior profiles.
"""

from .dialog import (
    And,
    Condition,
    ContextEquals,
    DialogNode,
    EntityPresent,
    EntityValueIs,
    Fallback,
    IntentIs,
    RenderFailure,
    match_node,
    render_template,
)
from .escalation import (
    AlreadyResolvedError,
    EscalationItem,
    EscalationNotFoundError,
    EscalationQueue,
    Resolution,
    UnknownIntentError,
    maybe_escalate,
    resolve_escalation,
)
from .kb import CourseKB, MalformedKBError, load_kb, load_kb_file
from .nlu import (
    Classification,
    EmptyWorkspaceError,
    EntityMention,
    TrainedModel,
    Violation,
    classify,
    extract_entities,
    normalize,
    train,
    validate_workspace,
)
from .pipeline import (
    Session,
    SessionStore,
    StaleModelError,
    Turn,
    UnknownSessionError,
    deliver_ta_answer,
    handle_message,
    resolve_pronouns,
)
from .service import AppState, InvalidWorkspaceError, ServiceConfig, create_app
from .students import (
    ClusterAssignment,
    FeatureSpace,
    ProfileStore,
    StudentProfile,
    TooFewDistinctPointsError,
    cluster_students,
    featurize,
    record_interaction,
)
from .workspace import (
    ConceptValue,
    EntityDef,
    Intent,
    Workspace,
    WorkspaceFormatError,
    load_workspace,
    workspace_from_json,
    write_workspace_file,
)

__version__ = "0.1.0"

__all__ = [
    "And",
    "AlreadyResolvedError",
    "AppState",
    "Classification",
    "ClusterAssignment",
    "ConceptValue",
    "Condition",
    "ContextEquals",
    "CourseKB",
    "DialogNode",
    "EmptyWorkspaceError",
    "EntityDef",
    "EntityMention",
    "EntityPresent",
    "EntityValueIs",
    "EscalationItem",
    "EscalationNotFoundError",
    "EscalationQueue",
    "Fallback",
    "FeatureSpace",
    "Intent",
    "IntentIs",
    "InvalidWorkspaceError",
    "MalformedKBError",
    "ProfileStore",
    "RenderFailure",
    "Resolution",
    "ServiceConfig",
    "Session",
    "SessionStore",
    "StaleModelError",
    "StudentProfile",
    "TooFewDistinctPointsError",
    "TrainedModel",
    "Turn",
    "UnknownIntentError",
    "UnknownSessionError",
    "Violation",
    "Workspace",
    "WorkspaceFormatError",
    "classify",
    "cluster_students",
    "create_app",
    "deliver_ta_answer",
    "extract_entities",
    "featurize",
    "handle_message",
    "load_kb",
    "load_kb_file",
    "load_workspace",
    "match_node",
    "maybe_escalate",
    "normalize",
    "record_interaction",
    "render_template",
    "resolve_escalation",
    "resolve_pronouns",
    "train",
    "validate_workspace",
    "workspace_from_json",
    "write_workspace_file",
]
