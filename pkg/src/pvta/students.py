"""Student modeling: usage profiles and k-means clustering.

Every processed turn bumps the student's count for its top-1 intent and for
each distinct entity mentioned. Profiles become L1-normalized frequency
vectors over a fixed feature space (all intents, then all entities, in
workspace order) and are grouped with seeded k-means++, so clusterings are
reproducible for a fixed (profiles, k, seed).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .workspace import Workspace

if TYPE_CHECKING:
    from .pipeline import Turn


class TooFewDistinctPointsError(Exception):
    """Fewer distinct feature vectors than requested clusters."""


@dataclass
class StudentProfile:
    student_id: str
    intent_counts: dict[str, int] = field(default_factory=dict)
    entity_counts: dict[str, int] = field(default_factory=dict)


def record_interaction(profile: StudentProfile, turn: "Turn") -> StudentProfile:
    """Count the turn's top-1 intent and each distinct mentioned entity.

    Escalated turns count under their proposed intent; TA-authored turns
    (no classification) are not counted.
    """
    if turn.classification is None:
        return profile
    intent = turn.classification.top_intent
    profile.intent_counts[intent] = profile.intent_counts.get(intent, 0) + 1
    for entity in sorted({m.entity for m in turn.mentions}):
        profile.entity_counts[entity] = profile.entity_counts.get(entity, 0) + 1
    return profile


class ProfileStore:
    """Profiles rebuilt from an append-only JSONL log of interaction events."""

    def __init__(self, log_path: str | Path | None = None):
        self._profiles: dict[str, StudentProfile] = {}
        self._lock = threading.Lock()
        self._log_path = Path(log_path) if log_path is not None else None
        if self._log_path is not None and self._log_path.exists():
            self._replay()

    def get_or_create(self, student_id: str) -> StudentProfile:
        with self._lock:
            if student_id not in self._profiles:
                self._profiles[student_id] = StudentProfile(student_id=student_id)
            return self._profiles[student_id]

    def get(self, student_id: str) -> StudentProfile | None:
        return self._profiles.get(student_id)

    def all_profiles(self) -> list[StudentProfile]:
        return sorted(self._profiles.values(), key=lambda p: p.student_id)

    def record(self, turn: "Turn") -> None:
        if turn.classification is None:
            return
        profile = self.get_or_create(turn.student_id)
        with self._lock:
            record_interaction(profile, turn)
            self._append_event({
                "student_id": turn.student_id,
                "intent": turn.classification.top_intent,
                "entities": sorted({m.entity for m in turn.mentions}),
            })

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
            profile = self._profiles.setdefault(
                event["student_id"], StudentProfile(student_id=event["student_id"])
            )
            intent = event["intent"]
            profile.intent_counts[intent] = profile.intent_counts.get(intent, 0) + 1
            for entity in event["entities"]:
                profile.entity_counts[entity] = profile.entity_counts.get(entity, 0) + 1


@dataclass(frozen=True)
class FeatureSpace:
    """Fixed vector layout: all intents, then all entities, in workspace order."""

    intents: tuple[str, ...]
    entities: tuple[str, ...]

    @classmethod
    def from_workspace(cls, workspace: Workspace) -> "FeatureSpace":
        return cls(
            intents=tuple(workspace.intent_names()),
            entities=tuple(workspace.entity_names()),
        )

    @property
    def dimension(self) -> int:
        return len(self.intents) + len(self.entities)


def featurize(profile: StudentProfile, space: FeatureSpace) -> np.ndarray:
    """Counts in feature-space order, L1-normalized; empty profile → zeros."""
    vec = np.array(
        [float(profile.intent_counts.get(i, 0)) for i in space.intents]
        + [float(profile.entity_counts.get(e, 0)) for e in space.entities]
    )
    total = vec.sum()
    return vec / total if total > 0 else vec


@dataclass
class ClusterAssignment:
    assignments: dict[str, int]
    centroids: np.ndarray
    inertia: float
    # Inertia at each assignment step; non-increasing by k-means descent.
    inertia_history: list[float]


def cluster_students(
    profiles: list[StudentProfile],
    space: FeatureSpace,
    k: int,
    seed: int,
    max_iterations: int = 100,
    tolerance: float = 1e-6,
) -> ClusterAssignment:
    """Seeded k-means++ over the profile feature vectors.

    Profiles are sorted by student id before seeding so the result does not
    depend on input order. Distance ties go to the lowest cluster index;
    a cluster left empty keeps its previous centroid.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ordered = sorted(profiles, key=lambda p: p.student_id)
    if not ordered:
        raise TooFewDistinctPointsError("no profiles to cluster")
    points = np.stack([featurize(p, space) for p in ordered])
    distinct = {tuple(row) for row in points}
    if len(distinct) < k:
        raise TooFewDistinctPointsError(
            f"{len(distinct)} distinct profiles cannot form {k} clusters"
        )

    rng = np.random.default_rng(seed)
    centroids = _seed_centroids(points, k, rng)
    history: list[float] = []
    for _ in range(max_iterations):
        labels, inertia = _assign(points, centroids)
        history.append(inertia)
        updated = centroids.copy()
        for j in range(k):
            members = points[labels == j]
            if len(members):
                updated[j] = members.mean(axis=0)
        shift = float(np.sqrt(((updated - centroids) ** 2).sum(axis=1)).max())
        centroids = updated
        if shift < tolerance:
            break
    labels, inertia = _assign(points, centroids)
    history.append(inertia)
    return ClusterAssignment(
        assignments={p.student_id: int(labels[i]) for i, p in enumerate(ordered)},
        centroids=centroids,
        inertia=inertia,
        inertia_history=history,
    )


def _assign(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, float]:
    sq_dist = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = sq_dist.argmin(axis=1)
    inertia = float(sq_dist[np.arange(len(points)), labels].sum())
    return labels, inertia


def _seed_centroids(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: spread initial centroids by squared-distance weight."""
    n = len(points)
    chosen = [int(rng.integers(n))]
    while len(chosen) < k:
        sq_dist = ((points[:, None, :] - points[chosen][None, :, :]) ** 2).sum(axis=2).min(axis=1)
        total = sq_dist.sum()
        if total == 0:
            chosen.append(int(rng.integers(n)))
            continue
        chosen.append(int(rng.choice(n, p=sq_dist / total)))
    return points[chosen].astype(float).copy()
