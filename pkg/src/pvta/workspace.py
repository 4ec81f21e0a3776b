"""The workspace: the authored training artifact of the assistant.

It bundles the intents (user goals with example utterances), the entities
(groups of domain concepts, each with a canonical name and synonyms) and the
ordered dialog nodes. On disk it is a single JSON document; the file is the
single source of training truth and gets rewritten atomically whenever a TA
resolution adds a new example.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .dialog import DialogNode, condition_to_json, parse_condition


class WorkspaceFormatError(Exception):
    """The document is structurally unusable (wrong types, missing fields)."""


@dataclass
class ConceptValue:
    canonical: str
    synonyms: list[str] = field(default_factory=list)

    def surfaces(self) -> list[str]:
        """All strings this concept can be referred to by."""
        return [self.canonical, *self.synonyms]


@dataclass
class EntityDef:
    name: str
    values: list[ConceptValue]


@dataclass
class Intent:
    name: str
    examples: list[str]


@dataclass
class Workspace:
    intents: list[Intent]
    entities: list[EntityDef]
    dialog_nodes: list[DialogNode]
    # Bumped on every mutation; a model trained from this workspace records
    # the revision it saw, so staleness is detectable.
    revision: int = 1
    # Unexpected JSON keys found while parsing, reported by validation.
    extra_keys: list[str] = field(default_factory=list)

    def intent_names(self) -> list[str]:
        return [intent.name for intent in self.intents]

    def entity_names(self) -> list[str]:
        return [entity.name for entity in self.entities]

    def has_intent(self, name: str) -> bool:
        return any(intent.name == name for intent in self.intents)

    def example_count(self) -> int:
        return sum(len(intent.examples) for intent in self.intents)

    def add_example(self, intent_name: str, example: str) -> None:
        """Append a training example to an intent and bump the revision."""
        for intent in self.intents:
            if intent.name == intent_name:
                intent.examples.append(example)
                self.revision += 1
                return
        raise ValueError(f"workspace has no intent named {intent_name!r}")

    def to_json(self) -> dict:
        return {
            "intents": [{"name": i.name, "examples": list(i.examples)} for i in self.intents],
            "entities": [
                {
                    "name": e.name,
                    "values": [
                        {"canonical": v.canonical, "synonyms": list(v.synonyms)}
                        for v in e.values
                    ],
                }
                for e in self.entities
            ],
            "dialog_nodes": [
                {
                    "id": n.id,
                    "condition": condition_to_json(n.condition),
                    "response": n.response,
                    "context_updates": dict(n.context_updates),
                }
                for n in self.dialog_nodes
            ],
        }


_TOP_LEVEL_KEYS = {"intents", "entities", "dialog_nodes"}
_INTENT_KEYS = {"name", "examples"}
_ENTITY_KEYS = {"name", "values"}
_CONCEPT_KEYS = {"canonical", "synonyms"}
_NODE_KEYS = {"id", "condition", "response", "context_updates"}


def workspace_from_json(doc: object) -> Workspace:
    """Parse a workspace document.

    Structural problems (wrong types, missing required fields) raise
    WorkspaceFormatError. Unknown keys are tolerated here but recorded on
    the workspace so that validation can reject them.
    """
    if not isinstance(doc, dict):
        raise WorkspaceFormatError("workspace document must be a JSON object")
    extra = [f"$.{k}" for k in doc if k not in _TOP_LEVEL_KEYS]

    intents = [
        _parse_intent(entry, i, extra) for i, entry in enumerate(_req_list(doc, "intents"))
    ]
    entities = [
        _parse_entity(entry, i, extra) for i, entry in enumerate(_req_list(doc, "entities"))
    ]
    nodes = [
        _parse_node(entry, i, extra) for i, entry in enumerate(_req_list(doc, "dialog_nodes"))
    ]
    return Workspace(intents=intents, entities=entities, dialog_nodes=nodes, extra_keys=extra)


def load_workspace(path: str | Path) -> Workspace:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise WorkspaceFormatError(f"{path}: not valid JSON ({exc})") from exc
    return workspace_from_json(doc)


def write_workspace_file(workspace: Workspace, path: str | Path) -> None:
    """Rewrite the workspace file atomically (write tmp, then rename)."""
    path = Path(path)
    payload = json.dumps(workspace.to_json(), indent=2, ensure_ascii=False) + "\n"
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(payload, encoding="utf-8")
    os.replace(tmp, path)


def _req_list(doc: dict, key: str) -> list:
    value = doc.get(key)
    if not isinstance(value, list):
        raise WorkspaceFormatError(f"top-level {key!r} must be an array")
    return value


def _req_str_field(entry: dict, key: str, where: str) -> str:
    value = entry.get(key)
    if not isinstance(value, str):
        raise WorkspaceFormatError(f"{where}: field {key!r} must be a string")
    return value


def _str_list_field(entry: dict, key: str, where: str) -> list[str]:
    value = entry.get(key)
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise WorkspaceFormatError(f"{where}: field {key!r} must be an array of strings")
    return list(value)


def _parse_intent(entry: object, index: int, extra: list[str]) -> Intent:
    where = f"intents[{index}]"
    if not isinstance(entry, dict):
        raise WorkspaceFormatError(f"{where}: must be an object")
    extra.extend(f"$.{where}.{k}" for k in entry if k not in _INTENT_KEYS)
    return Intent(
        name=_req_str_field(entry, "name", where),
        examples=_str_list_field(entry, "examples", where),
    )


def _parse_entity(entry: object, index: int, extra: list[str]) -> EntityDef:
    where = f"entities[{index}]"
    if not isinstance(entry, dict):
        raise WorkspaceFormatError(f"{where}: must be an object")
    extra.extend(f"$.{where}.{k}" for k in entry if k not in _ENTITY_KEYS)
    raw_values = entry.get("values")
    if not isinstance(raw_values, list):
        raise WorkspaceFormatError(f"{where}: field 'values' must be an array")
    values = []
    for j, raw in enumerate(raw_values):
        vwhere = f"{where}.values[{j}]"
        if not isinstance(raw, dict):
            raise WorkspaceFormatError(f"{vwhere}: must be an object")
        extra.extend(f"$.{vwhere}.{k}" for k in raw if k not in _CONCEPT_KEYS)
        synonyms = raw.get("synonyms", [])
        if not isinstance(synonyms, list) or not all(isinstance(s, str) for s in synonyms):
            raise WorkspaceFormatError(f"{vwhere}: field 'synonyms' must be an array of strings")
        values.append(
            ConceptValue(canonical=_req_str_field(raw, "canonical", vwhere), synonyms=list(synonyms))
        )
    return EntityDef(name=_req_str_field(entry, "name", where), values=values)


def _parse_node(entry: object, index: int, extra: list[str]) -> DialogNode:
    where = f"dialog_nodes[{index}]"
    if not isinstance(entry, dict):
        raise WorkspaceFormatError(f"{where}: must be an object")
    extra.extend(f"$.{where}.{k}" for k in entry if k not in _NODE_KEYS)
    try:
        condition = parse_condition(entry.get("condition"))
    except ValueError as exc:
        raise WorkspaceFormatError(f"{where}: {exc}") from exc
    updates = entry.get("context_updates", {})
    if not isinstance(updates, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in updates.items()
    ):
        raise WorkspaceFormatError(f"{where}: 'context_updates' must map strings to strings")
    return DialogNode(
        id=_req_str_field(entry, "id", where),
        condition=condition,
        response=_req_str_field(entry, "response", where),
        context_updates=dict(updates),
    )
