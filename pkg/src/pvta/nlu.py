"""Language understanding: tokenizer, trainable intent classifier, entity extraction.

The classifier is a multinomial naive Bayes over unigram tokens with Laplace
smoothing. Posteriors double as the per-intent confidence that drives the
escalation gate, so classification is computed carefully in log space and
normalized; ties are broken lexicographically for cross-platform determinism.

Entity extraction is dictionary-based: a left-to-right longest-match scan over
the normalized tokens against every concept surface (canonical name plus
synonyms) defined in the workspace.
"""

from __future__ import annotations

import itertools
import math
import unicodedata
from dataclasses import dataclass

from .dialog import (
    And,
    Condition,
    ContextEquals,
    EntityPresent,
    EntityValueIs,
    Fallback,
    IntentIs,
    template_violations,
)
from .workspace import Workspace


class EmptyWorkspaceError(Exception):
    """Training was requested on a workspace with no intents."""


_APOSTROPHES = ("'", "’")


def normalize(text: str) -> list[str]:
    """Lowercase, strip punctuation (keeping apostrophes inside words), split.

    Punctuation (Unicode category P*) becomes a token boundary, so
    "matrix-factorization!!" yields ["matrix", "factorization"]. An apostrophe
    flanked by letters or digits is kept, so "don't" survives as one token.
    """
    lowered = text.lower()
    out: list[str] = []
    for i, ch in enumerate(lowered):
        if unicodedata.category(ch).startswith("P"):
            if ch in _APOSTROPHES and 0 < i < len(lowered) - 1 \
                    and lowered[i - 1].isalnum() and lowered[i + 1].isalnum():
                out.append(ch)
            else:
                out.append(" ")
        else:
            out.append(ch)
    return "".join(out).split()


_revision_counter = itertools.count(1)


@dataclass(frozen=True)
class TrainedModel:
    """Immutable classifier snapshot. All mappings are read-only by convention."""

    vocabulary: tuple[str, ...]
    token_counts: dict[str, dict[str, int]]
    example_counts: dict[str, int]
    alpha: float
    revision: int
    workspace_revision: int

    @property
    def intent_names(self) -> list[str]:
        return list(self.example_counts)

    def total_examples(self) -> int:
        return sum(self.example_counts.values())


@dataclass(frozen=True)
class Classification:
    """Per-intent confidences, best first; ties broken by intent name."""

    ranked: tuple[tuple[str, float], ...]

    @property
    def top_intent(self) -> str:
        return self.ranked[0][0]

    @property
    def top_confidence(self) -> float:
        return self.ranked[0][1]

    def confidence_of(self, intent: str) -> float:
        for name, conf in self.ranked:
            if name == intent:
                return conf
        raise KeyError(intent)


@dataclass(frozen=True)
class EntityMention:
    entity: str
    value: str
    surface: str
    # Half-open token index range into the normalized question.
    span: tuple[int, int]


def train(workspace: Workspace, alpha: float = 1.0, revision: int | None = None) -> TrainedModel:
    """Build a classifier snapshot from the workspace training examples.

    The model revision strictly increases across retrains within a process;
    callers that persist models across restarts pass an explicit revision.
    """
    if not workspace.intents:
        raise EmptyWorkspaceError("cannot train on a workspace with no intents")
    vocab: set[str] = set()
    token_counts: dict[str, dict[str, int]] = {}
    example_counts: dict[str, int] = {}
    for intent in workspace.intents:
        counts: dict[str, int] = {}
        for example in intent.examples:
            for token in normalize(example):
                counts[token] = counts.get(token, 0) + 1
                vocab.add(token)
        token_counts[intent.name] = counts
        example_counts[intent.name] = len(intent.examples)
    return TrainedModel(
        vocabulary=tuple(sorted(vocab)),
        token_counts=token_counts,
        example_counts=example_counts,
        alpha=alpha,
        revision=next(_revision_counter) if revision is None else revision,
        workspace_revision=workspace.revision,
    )


def classify(model: TrainedModel, tokens: list[str]) -> Classification:
    """Posterior of each intent given the tokens, in log space, normalized.

    Out-of-vocabulary tokens are ignored; with no in-vocabulary tokens the
    posteriors reduce to the training priors.
    """
    in_vocab = set(model.vocabulary)
    known = [t for t in tokens if t in in_vocab]
    vocab_size = len(model.vocabulary)
    total = model.total_examples()
    log_scores: dict[str, float] = {}
    for intent, n_examples in model.example_counts.items():
        score = math.log(n_examples) - math.log(total)
        counts = model.token_counts[intent]
        denom = sum(counts.values()) + model.alpha * vocab_size
        for token in known:
            score += math.log(counts.get(token, 0) + model.alpha) - math.log(denom)
        log_scores[intent] = score
    peak = max(log_scores.values())
    weights = {intent: math.exp(s - peak) for intent, s in log_scores.items()}
    z = sum(weights.values())
    ranked = sorted(
        ((intent, w / z) for intent, w in weights.items()),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return Classification(ranked=tuple(ranked))


def extract_entities(workspace: Workspace, tokens: list[str]) -> list[EntityMention]:
    """Left-to-right longest-match scan of concept surfaces over the tokens.

    Equal-length candidates resolve to the entity earlier in workspace order,
    then the concept value earlier in its list. Matches never overlap.
    """
    surface_index: dict[tuple[str, ...], tuple[str, str]] = {}
    max_len = 0
    for entity in workspace.entities:
        for value in entity.values:
            for surface in value.surfaces():
                key = tuple(normalize(surface))
                if not key:
                    continue
                surface_index.setdefault(key, (entity.name, value.canonical))
                max_len = max(max_len, len(key))

    mentions: list[EntityMention] = []
    i = 0
    while i < len(tokens):
        hit = None
        for length in range(min(max_len, len(tokens) - i), 0, -1):
            key = tuple(tokens[i:i + length])
            if key in surface_index:
                entity_name, canonical = surface_index[key]
                hit = EntityMention(
                    entity=entity_name,
                    value=canonical,
                    surface=" ".join(key),
                    span=(i, i + length),
                )
                break
        if hit is None:
            i += 1
        else:
            mentions.append(hit)
            i = hit.span[1]
    return mentions


@dataclass(frozen=True)
class Violation:
    """One broken workspace invariant; `subject` names the offending element."""

    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.subject}: {self.message}"


def validate_workspace(workspace: Workspace) -> list[Violation]:
    """Report every violated workspace, entity and dialog invariant.

    An empty result means the workspace is fit for training and serving.
    """
    violations: list[Violation] = []
    add = violations.append

    for key in workspace.extra_keys:
        add(Violation("unknown-key", key, "unrecognized key in workspace document"))

    seen_intents: set[str] = set()
    for intent in workspace.intents:
        if not intent.name:
            add(Violation("empty-name", "intent", "intent name must be non-empty"))
        if intent.name in seen_intents:
            add(Violation("duplicate-intent", intent.name, "intent name appears more than once"))
        seen_intents.add(intent.name)
        if not intent.examples:
            add(Violation("no-examples", intent.name, "intent has no example utterances"))
        for example in intent.examples:
            if not normalize(example):
                add(Violation(
                    "empty-example", intent.name,
                    f"example {example!r} normalizes to no tokens",
                ))

    seen_entities: set[str] = set()
    entity_values: dict[str, set[str]] = {}
    for entity in workspace.entities:
        if not entity.name:
            add(Violation("empty-name", "entity", "entity name must be non-empty"))
        if entity.name in seen_entities:
            add(Violation("duplicate-entity", entity.name, "entity name appears more than once"))
        seen_entities.add(entity.name)
        canonicals: set[str] = set()
        synonyms: set[str] = set()
        for value in entity.values:
            if not value.canonical:
                add(Violation("empty-name", entity.name, "concept canonical name must be non-empty"))
            if value.canonical in canonicals:
                add(Violation(
                    "duplicate-concept", f"{entity.name}/{value.canonical}",
                    "canonical concept name duplicated within entity",
                ))
            canonicals.add(value.canonical)
            for synonym in value.synonyms:
                if synonym in synonyms:
                    add(Violation(
                        "duplicate-synonym", f"{entity.name}/{synonym}",
                        "synonym duplicated within entity",
                    ))
                synonyms.add(synonym)
        entity_values[entity.name] = canonicals

    fallback_count = 0
    seen_nodes: set[str] = set()
    for node in workspace.dialog_nodes:
        if node.id in seen_nodes:
            add(Violation("duplicate-node", node.id, "dialog node id appears more than once"))
        seen_nodes.add(node.id)
        if isinstance(node.condition, Fallback):
            fallback_count += 1
        _check_condition(node.condition, node.id, seen_intents, entity_values, add, top_level=True)
        for placeholder in template_violations(node.response):
            add(Violation("bad-placeholder", node.id, f"malformed placeholder {placeholder!r}"))
        for expr in node.context_updates.values():
            for placeholder in template_violations(expr):
                add(Violation(
                    "bad-placeholder", node.id,
                    f"malformed placeholder {placeholder!r} in context update",
                ))
    if fallback_count != 1:
        add(Violation(
            "fallback-count", "dialog_nodes",
            f"expected exactly one fallback node, found {fallback_count}",
        ))
    return violations


def _check_condition(
    condition: Condition,
    node_id: str,
    intents: set[str],
    entity_values: dict[str, set[str]],
    add,
    top_level: bool,
) -> None:
    if isinstance(condition, IntentIs):
        if condition.intent not in intents:
            add(Violation("unknown-intent", node_id, f"condition references undefined intent #{condition.intent}"))
    elif isinstance(condition, EntityPresent):
        if condition.entity not in entity_values:
            add(Violation("unknown-entity", node_id, f"condition references undefined entity @{condition.entity}"))
    elif isinstance(condition, EntityValueIs):
        if condition.entity not in entity_values:
            add(Violation("unknown-entity", node_id, f"condition references undefined entity @{condition.entity}"))
        elif condition.value not in entity_values[condition.entity]:
            add(Violation(
                "unknown-concept", node_id,
                f"condition references undefined concept @{condition.entity}:{condition.value}",
            ))
    elif isinstance(condition, And):
        if not condition.conditions:
            add(Violation("empty-and", node_id, "And condition with no members"))
        for sub in condition.conditions:
            _check_condition(sub, node_id, intents, entity_values, add, top_level=False)
    elif isinstance(condition, Fallback):
        if not top_level:
            add(Violation("nested-fallback", node_id, "fallback may not appear inside And"))
    elif isinstance(condition, ContextEquals):
        pass
