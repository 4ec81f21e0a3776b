"""Course knowledge store consulted while completing answer templates.

The KB is a tree of string leaves addressed by dotted paths such as
`exams.midterm.date`. It is loaded from a JSON file of nested objects and is
immutable afterwards; an admin reload swaps in a whole new snapshot.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

_SEGMENT_RE = re.compile(r"^[a-z0-9_]+$")


class MalformedKBError(Exception):
    """KB document has a non-string leaf or an invalid path segment."""


class CourseKB:
    def __init__(self, leaves: dict[str, str]):
        self._leaves = dict(leaves)

    def lookup(self, path: str) -> str | None:
        """Exact-leaf match only; interior nodes and absent paths give None."""
        return self._leaves.get(path)

    def paths(self) -> list[str]:
        return sorted(self._leaves)

    def __len__(self) -> int:
        return len(self._leaves)


def load_kb(document: object) -> CourseKB:
    if not isinstance(document, dict):
        raise MalformedKBError("KB document must be a JSON object")
    leaves: dict[str, str] = {}
    _flatten(document, (), leaves)
    return CourseKB(leaves)


def load_kb_file(path: str | Path) -> CourseKB:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedKBError(f"{path}: not valid JSON ({exc})") from exc
    return load_kb(doc)


def _flatten(node: dict, prefix: tuple[str, ...], leaves: dict[str, str]) -> None:
    for key, value in node.items():
        if not isinstance(key, str) or not _SEGMENT_RE.match(key):
            raise MalformedKBError(f"invalid path segment {key!r}")
        path = prefix + (key,)
        if isinstance(value, dict):
            _flatten(value, path, leaves)
        elif isinstance(value, str):
            leaves[".".join(path)] = value
        else:
            raise MalformedKBError(
                f"leaf {'.'.join(path)!r} must be a string, got {type(value).__name__}"
            )
