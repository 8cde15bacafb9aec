"""FIFO trajectory buffer with recent-K retrieval.

One buffer per agent per episode; the knowledge library itself never changes
mid-episode, so only committed planning steps live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

from .skills import Skill, SkillFailure, render_skill

DEFAULT_CAPACITY = 40
DEFAULT_RECENT_K = 5

REPLACED = "replaced"
ANNOTATED = "annotated"


class OutOfOrderError(ValueError):
    pass


class AlreadyCorrectedError(ValueError):
    pass


@dataclass(frozen=True)
class Correction:
    kind: str  # replaced | annotated
    observed: Skill
    note: str | None = None


@dataclass(frozen=True)
class TrajectoryEntry:
    tick: int
    scene: str
    analysis: str
    belief: Skill | SkillFailure  # predicted teammate intention
    own_skill: Skill
    correction: Correction | None = None

    def rendered_belief(self) -> str:
        if self.correction is not None and self.correction.kind == REPLACED:
            return render_skill(self.correction.observed)
        base = (render_skill(self.belief) if isinstance(self.belief, Skill)
                else self.belief.message)
        if self.correction is not None and self.correction.kind == ANNOTATED:
            return f"{base} [note: {self.correction.note}]"
        return base


class TrajectoryBuffer:
    """Fixed-capacity buffer, strictly oldest-first eviction."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY,
                 me: int = 0, teammate: int = 1):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.me = me
        self.teammate = teammate
        self._entries: list[TrajectoryEntry] = []

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> tuple[TrajectoryEntry, ...]:
        return tuple(self._entries)

    def append(self, entry: TrajectoryEntry) -> None:
        if self._entries and entry.tick <= self._entries[-1].tick:
            raise OutOfOrderError(
                f"entry tick {entry.tick} not after {self._entries[-1].tick}"
            )
        self._entries.append(entry)
        if len(self._entries) > self.capacity:
            del self._entries[0]

    def last(self) -> TrajectoryEntry | None:
        return self._entries[-1] if self._entries else None

    def replace_last(self, entry: TrajectoryEntry) -> None:
        if not self._entries:
            raise IndexError("buffer is empty")
        self._entries[-1] = entry

    def render_entry(self, entry: TrajectoryEntry) -> str:
        return (
            f"Scene {entry.tick}: {entry.scene}\n"
            f"Analysis: {entry.analysis}\n"
            f"Intention for Player {self.teammate}: {entry.rendered_belief()}\n"
            f"Plan for Player {self.me}: {render_skill(entry.own_skill)}"
        )

    def retrieve_recent_k(self, k: int) -> list[str]:
        """Last min(k, size) entries rendered in scene format, oldest first."""
        if k < 0:
            raise ValueError("k must be >= 0")
        if k == 0:
            return []
        return [self.render_entry(e) for e in self._entries[-k:]]

    def retrieve(self, strategy: "RetrievalStrategy") -> list[str]:
        return strategy.retrieve(self)


class RetrievalStrategy(Protocol):
    def retrieve(self, buffer: TrajectoryBuffer) -> list[str]: ...


@dataclass(frozen=True)
class RecentK:
    """The only shipped retrieval strategy: the K most recent entries.
    Relevance-based strategies can slot in behind the same interface."""

    k: int = DEFAULT_RECENT_K

    def retrieve(self, buffer: TrajectoryBuffer) -> list[str]:
        return buffer.retrieve_recent_k(self.k)
