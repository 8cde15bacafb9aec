from __future__ import annotations

import pytest

from coopkitchen.belief import (
    ANNOTATION,
    PredictionAccuracy,
    REPLACEMENT,
    infer_teammate_skill,
    reconcile,
)
from coopkitchen.engine import (
    DISH,
    EV_BLOCKED,
    EV_DELIVERED,
    EV_FILLED_DISH,
    EV_ONION_IN_POT,
    EV_PICKED_UP,
    EV_PLACED_ON_COUNTER,
    Event,
    ONION,
)
from coopkitchen.layout import Position
from coopkitchen.memory import (
    ANNOTATED,
    AlreadyCorrectedError,
    REPLACED,
    TrajectoryEntry,
)
from coopkitchen.skills import (
    DELIVER,
    FILL_DISH,
    PICKUP_DISH,
    PICKUP_ONION,
    PLACE_ON_COUNTER,
    PUT_ONION,
    SkillFailure,
)


def entry(belief=PICKUP_DISH) -> TrajectoryEntry:
    return TrajectoryEntry(
        tick=5, scene="State: x.", analysis="a", belief=belief,
        own_skill=PUT_ONION,
    )


def test_event_to_skill_mapping():
    pos = Position(2, 0)
    table = [
        (Event(EV_PICKED_UP, 1, ONION, pos), PICKUP_ONION),
        (Event(EV_PICKED_UP, 1, DISH, pos), PICKUP_DISH),
        (Event(EV_ONION_IN_POT, 1, ONION, pos), PUT_ONION),
        (Event(EV_FILLED_DISH, 1, "soup", pos), FILL_DISH),
        (Event(EV_DELIVERED, 1, "soup", pos), DELIVER),
        (Event(EV_PLACED_ON_COUNTER, 1, ONION, pos), PLACE_ON_COUNTER),
    ]
    for event, skill in table:
        assert infer_teammate_skill([event], teammate=1) == skill


def test_movement_only_interval_is_unknown():
    events = [Event(EV_BLOCKED, 1), Event("noop", 1)]
    assert infer_teammate_skill(events, teammate=1) is None
    assert infer_teammate_skill([], teammate=1) is None


def test_own_events_ignored():
    events = [Event(EV_ONION_IN_POT, 0, ONION, Position(2, 0))]
    assert infer_teammate_skill(events, teammate=1) is None


def test_latest_event_wins():
    pos = Position(2, 0)
    events = [
        Event(EV_PICKED_UP, 1, ONION, pos),
        Event(EV_ONION_IN_POT, 1, ONION, pos),
    ]
    assert infer_teammate_skill(events, teammate=1) == PUT_ONION


def test_reconcile_match_unchanged():
    e = entry(belief=PICKUP_ONION)
    assert reconcile(e, PICKUP_ONION, REPLACEMENT) is e


def test_reconcile_unknown_unchanged():
    e = entry()
    assert reconcile(e, None, REPLACEMENT) is e
    assert reconcile(e, None, ANNOTATION) is e


def test_reconcile_replacement():
    e = reconcile(entry(belief=PICKUP_DISH), PUT_ONION, REPLACEMENT)
    assert e.correction is not None
    assert e.correction.kind == REPLACED
    assert e.correction.observed == PUT_ONION
    assert e.rendered_belief() == "put_onion_in_pot()"


def test_reconcile_annotation():
    e = reconcile(entry(belief=PICKUP_DISH), PUT_ONION, ANNOTATION)
    assert e.correction.kind == ANNOTATED
    assert "actually did put_onion_in_pot()" in e.correction.note
    rendered = e.rendered_belief()
    assert rendered.startswith("pickup(dish)")
    assert "put_onion_in_pot()" in rendered


def test_reconcile_guards_double_correction():
    e = reconcile(entry(belief=PICKUP_DISH), PUT_ONION, REPLACEMENT)
    with pytest.raises(AlreadyCorrectedError):
        reconcile(e, PICKUP_ONION, REPLACEMENT)


def test_reconcile_unknown_mode_rejected():
    with pytest.raises(ValueError):
        reconcile(entry(), PUT_ONION, "wishful_thinking")


def test_unparseable_belief_counts_as_wrong():
    bad = SkillFailure("unknown_skill", "I cannot do move_left().")
    e = reconcile(entry(belief=bad), PUT_ONION, REPLACEMENT)
    assert e.correction is not None


def test_prediction_accuracy_tally():
    accuracy = PredictionAccuracy()
    accuracy.record(PICKUP_ONION, PICKUP_ONION)  # match
    accuracy.record(PICKUP_ONION, PUT_ONION)     # falsified
    accuracy.record(PICKUP_ONION, None)          # not falsifiable
    assert accuracy.falsifiable == 2
    assert accuracy.matched == 1
    assert accuracy.value == 0.5
    assert accuracy.as_dict() == {
        "falsifiable": 2, "matched": 1, "accuracy": 0.5,
    }


def test_prediction_accuracy_empty_is_none():
    assert PredictionAccuracy().value is None
