"""Teammate skill inference from engine events plus belief correction.

A prediction is only falsified by an observed interaction that differs from
it; an interval where the teammate merely moved is consistent with any
in-progress skill and leaves the stored belief alone.
"""

from __future__ import annotations

from dataclasses import replace

from .engine import (
    DISH,
    EV_DELIVERED,
    EV_FILLED_DISH,
    EV_ONION_IN_POT,
    EV_PICKED_UP,
    EV_PLACED_ON_COUNTER,
    Event,
    ONION,
)
from .memory import ANNOTATED, AlreadyCorrectedError, Correction, REPLACED, TrajectoryEntry
from .skills import (
    DELIVER,
    FILL_DISH,
    PLACE_ON_COUNTER,
    PUT_ONION,
    Skill,
    pickup,
    render_skill,
)

REPLACEMENT = "replacement"
ANNOTATION = "annotation"
CORRECTION_MODES = (REPLACEMENT, ANNOTATION)

_EVENT_TO_SKILL = {
    EV_ONION_IN_POT: PUT_ONION,
    EV_FILLED_DISH: FILL_DISH,
    EV_DELIVERED: DELIVER,
    EV_PLACED_ON_COUNTER: PLACE_ON_COUNTER,
}


def infer_teammate_skill(events: list[Event], teammate: int) -> Skill | None:
    """Map the teammate's most recent completed interaction to a skill.

    Returns None (unknown) when the interval held no interaction events:
    movement alone never falsifies a prediction.
    """
    observed: Skill | None = None
    for ev in events:
        if ev.player != teammate:
            continue
        if ev.kind == EV_PICKED_UP and ev.obj in (ONION, DISH):
            observed = pickup(ev.obj)
        elif ev.kind in _EVENT_TO_SKILL:
            observed = _EVENT_TO_SKILL[ev.kind]
    return observed


def beliefs_match(belief, observed: Skill | None) -> bool:
    """Wait-flavored beliefs and unknown observations never falsify."""
    if observed is None:
        return True
    if not isinstance(belief, Skill):
        return False  # an unparseable belief is wrong by construction
    return belief == observed


def reconcile(entry: TrajectoryEntry, observed: Skill | None,
              mode: str) -> TrajectoryEntry:
    """Apply belief correction once the teammate's real behavior is known."""
    if mode not in CORRECTION_MODES:
        raise ValueError(f"unknown correction mode {mode!r}")
    if entry.correction is not None:
        raise AlreadyCorrectedError(f"entry at tick {entry.tick} already corrected")
    if observed is None or beliefs_match(entry.belief, observed):
        return entry
    if mode == REPLACEMENT:
        return replace(entry, correction=Correction(REPLACED, observed))
    note = ("the previous prediction was incorrect; the teammate actually did "
            f"{render_skill(observed)}")
    return replace(entry, correction=Correction(ANNOTATED, observed, note))


class PredictionAccuracy:
    """Running tally of falsifiable predictions vs. matches for episode logs."""

    def __init__(self):
        self.falsifiable = 0
        self.matched = 0

    def record(self, belief, observed: Skill | None) -> None:
        if observed is None:
            return
        self.falsifiable += 1
        if isinstance(belief, Skill) and belief == observed:
            self.matched += 1

    @property
    def value(self) -> float | None:
        if self.falsifiable == 0:
            return None
        return self.matched / self.falsifiable

    def as_dict(self) -> dict:
        return {
            "falsifiable": self.falsifiable,
            "matched": self.matched,
            "accuracy": self.value,
        }
