"""Rule-based dialog: ordered (condition -> response template) nodes.

A question is answered by the first node in workspace order whose condition
holds; a mandatory fallback node guarantees there always is one. Response
templates carry three placeholder kinds that get filled during
post-processing: ``{{kb:dotted.path}}`` from the course knowledge base,
``{{entity:name}}`` from the entity mentions found in the question, and
``{{context:key}}`` from the per-session context.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Union

if TYPE_CHECKING:
    from .kb import CourseKB
    from .nlu import Classification, EntityMention


class RenderFailure(Exception):
    """A template placeholder could not be resolved.

    The pipeline treats this exactly like a low-confidence answer: the turn
    is escalated to a human TA instead of returning a partial answer.
    """

    def __init__(self, placeholder: str):
        super().__init__(f"unresolvable placeholder {{{{{placeholder}}}}}")
        self.placeholder = placeholder


@dataclass(frozen=True)
class IntentIs:
    intent: str


@dataclass(frozen=True)
class EntityPresent:
    entity: str


@dataclass(frozen=True)
class EntityValueIs:
    entity: str
    value: str


@dataclass(frozen=True)
class ContextEquals:
    key: str
    value: str


@dataclass(frozen=True)
class And:
    conditions: tuple["Condition", ...]


@dataclass(frozen=True)
class Fallback:
    pass


Condition = Union[IntentIs, EntityPresent, EntityValueIs, ContextEquals, And, Fallback]


@dataclass
class DialogNode:
    """One dialog rule; position in the workspace list decides priority."""

    id: str
    condition: Condition
    response: str
    context_updates: dict[str, str] = field(default_factory=dict)


def condition_holds(
    condition: Condition,
    top_intent: str,
    mentions: list["EntityMention"],
    context: dict[str, str],
) -> bool:
    """Evaluate a condition against the top-1 intent, mentions and context."""
    if isinstance(condition, IntentIs):
        return condition.intent == top_intent
    if isinstance(condition, EntityPresent):
        return any(m.entity == condition.entity for m in mentions)
    if isinstance(condition, EntityValueIs):
        return any(
            m.entity == condition.entity and m.value == condition.value for m in mentions
        )
    if isinstance(condition, ContextEquals):
        return context.get(condition.key) == condition.value
    if isinstance(condition, And):
        return all(condition_holds(c, top_intent, mentions, context) for c in condition.conditions)
    if isinstance(condition, Fallback):
        return True
    raise TypeError(f"unknown condition type: {type(condition).__name__}")


def match_node(
    nodes: list[DialogNode],
    classification: "Classification",
    mentions: list["EntityMention"],
    context: dict[str, str],
) -> DialogNode:
    """Return the first node whose condition is satisfied.

    Only the top-1 intent of the classification is consulted. On a validated
    workspace this is total: the fallback node matches unconditionally.
    """
    top = classification.top_intent
    for node in nodes:
        if condition_holds(node.condition, top, mentions, context):
            return node
    raise LookupError("no dialog node matched and no fallback node is present")


# --- templates -------------------------------------------------------------

_PLACEHOLDER_RE = re.compile(r"\{\{(kb|entity|context):([^{}]+)\}\}")
_KB_PATH_RE = re.compile(r"^[a-z0-9_]+(\.[a-z0-9_]+)*$")


def render_template(
    template: str,
    kb: "CourseKB",
    mentions: list["EntityMention"],
    context: dict[str, str],
) -> str:
    """Fill every placeholder in ``template``; raise RenderFailure otherwise.

    ``{{entity:e}}`` resolves to the canonical value of the first mention of
    entity ``e``. A successful render never contains ``{{`` or ``}}``.
    """

    def resolve(match: re.Match[str]) -> str:
        kind, arg = match.group(1), match.group(2)
        if kind == "kb":
            value = kb.lookup(arg)
            if value is None:
                raise RenderFailure(f"kb:{arg}")
            return value
        if kind == "entity":
            for m in mentions:
                if m.entity == arg:
                    return m.value
            raise RenderFailure(f"entity:{arg}")
        value = context.get(arg)
        if value is None:
            raise RenderFailure(f"context:{arg}")
        return value

    rendered = _PLACEHOLDER_RE.sub(resolve, template)
    if "{{" in rendered or "}}" in rendered:
        raise RenderFailure(rendered[rendered.find("{") : rendered.find("{") + 40])
    return rendered


def compute_context_updates(
    node: DialogNode,
    kb: "CourseKB",
    mentions: list["EntityMention"],
    context: dict[str, str],
) -> dict[str, str]:
    """Render the node's context update expressions against pre-turn state.

    Updates whose expression cannot be resolved are dropped; the rest are
    returned for the caller to merge into the session context.
    """
    updates: dict[str, str] = {}
    for key, expression in node.context_updates.items():
        try:
            updates[key] = render_template(expression, kb, mentions, context)
        except RenderFailure:
            continue
    return updates


def template_violations(template: str) -> list[str]:
    """Describe malformed placeholders in a template, empty list if clean."""
    problems: list[str] = []
    stripped = _PLACEHOLDER_RE.sub("", template)
    if "{{" in stripped or "}}" in stripped:
        problems.append(f"malformed placeholder braces in {template!r}")
    for match in _PLACEHOLDER_RE.finditer(template):
        kind, arg = match.group(1), match.group(2)
        if kind == "kb" and not _KB_PATH_RE.match(arg):
            problems.append(f"invalid kb path {arg!r} in {template!r}")
        elif kind in ("entity", "context") and not arg.strip():
            problems.append(f"empty {kind} placeholder in {template!r}")
    return problems


# --- JSON form -------------------------------------------------------------

def parse_condition(doc: object) -> Condition:
    """Build a Condition from its workspace JSON form.

    Raises ValueError on structurally unusable documents; referential checks
    (does the intent exist, is the fallback unique) are validation's job.
    """
    if not isinstance(doc, dict):
        raise ValueError(f"condition must be an object, got {type(doc).__name__}")
    kind = doc.get("type")
    if kind == "intent_is":
        return IntentIs(_req_str(doc, "intent"))
    if kind == "entity_present":
        return EntityPresent(_req_str(doc, "entity"))
    if kind == "entity_value_is":
        return EntityValueIs(_req_str(doc, "entity"), _req_str(doc, "value"))
    if kind == "context_equals":
        return ContextEquals(_req_str(doc, "key"), _req_str(doc, "value"))
    if kind == "and":
        parts = doc.get("conditions")
        if not isinstance(parts, list):
            raise ValueError("'and' condition needs a 'conditions' array")
        return And(tuple(parse_condition(p) for p in parts))
    if kind == "fallback":
        return Fallback()
    raise ValueError(f"unknown condition type: {kind!r}")


def condition_to_json(condition: Condition) -> dict:
    if isinstance(condition, IntentIs):
        return {"type": "intent_is", "intent": condition.intent}
    if isinstance(condition, EntityPresent):
        return {"type": "entity_present", "entity": condition.entity}
    if isinstance(condition, EntityValueIs):
        return {"type": "entity_value_is", "entity": condition.entity, "value": condition.value}
    if isinstance(condition, ContextEquals):
        return {"type": "context_equals", "key": condition.key, "value": condition.value}
    if isinstance(condition, And):
        return {"type": "and", "conditions": [condition_to_json(c) for c in condition.conditions]}
    if isinstance(condition, Fallback):
        return {"type": "fallback"}
    raise TypeError(f"unknown condition type: {type(condition).__name__}")


def _req_str(doc: dict, key: str) -> str:
    value = doc.get(key)
    if not isinstance(value, str):
        raise ValueError(f"condition field {key!r} must be a string")
    return value
