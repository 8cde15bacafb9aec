"""The six-skill vocabulary, precondition checks, and failure explanations.

The canonical skill string grammar is ``name '(' [arg] ')'`` with names
pickup, place_obj_on_counter, put_onion_in_pot, fill_dish_with_soup,
deliver_soup, wait. ``parse_skill(render_skill(s)) == s`` for every skill
value, and this rendering is reused by the language and memory modules.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .engine import DISH, GameState, NOTHING, ONION, SOUP

PICKUP = "pickup"
PLACE_OBJ_ON_COUNTER = "place_obj_on_counter"
PUT_ONION_IN_POT = "put_onion_in_pot"
FILL_DISH_WITH_SOUP = "fill_dish_with_soup"
DELIVER_SOUP = "deliver_soup"
WAIT = "wait"

SKILL_NAMES = (
    PICKUP,
    PLACE_OBJ_ON_COUNTER,
    PUT_ONION_IN_POT,
    FILL_DISH_WITH_SOUP,
    DELIVER_SOUP,
    WAIT,
)

# Failure reasons, in the vocabulary the verificator reports.
HAND_NOT_EMPTY = "hand_not_empty"
HAND_EMPTY = "hand_empty"
WRONG_HELD_OBJECT = "wrong_held_object"
INVALID_OBJECT = "invalid_object"
POT_FULL = "pot_full"
NO_COOKING_OR_READY_SOUP = "no_cooking_or_ready_soup"
HOLDING_SOUP_MUST_DELIVER = "holding_soup_must_deliver"
INVALID_WAIT_COUNT = "invalid_wait_count"
UNKNOWN_SKILL = "unknown_skill"


@dataclass(frozen=True)
class Skill:
    name: str
    obj: str | None = None  # pickup only
    ticks: int | None = None  # wait only


@dataclass(frozen=True)
class SkillFailure:
    reason: str
    message: str
    expected: str | None = None  # wrong_held_object: the object needed in hand


def pickup(obj: str) -> Skill:
    return Skill(PICKUP, obj=obj)


def wait(ticks: int) -> Skill:
    return Skill(WAIT, ticks=ticks)


PICKUP_ONION = pickup(ONION)
PICKUP_DISH = pickup(DISH)
PUT_ONION = Skill(PUT_ONION_IN_POT)
FILL_DISH = Skill(FILL_DISH_WITH_SOUP)
DELIVER = Skill(DELIVER_SOUP)
PLACE_ON_COUNTER = Skill(PLACE_OBJ_ON_COUNTER)


def render_skill(skill: Skill) -> str:
    if skill.name == PICKUP:
        return f"pickup({skill.obj})"
    if skill.name == WAIT:
        return f"wait({skill.ticks})"
    return f"{skill.name}()"


_CALL_RE = re.compile(r"^([a-z_]+)\s*(?:\(\s*([^()]*?)\s*\))?$")


def parse_skill(text: str) -> Skill | SkillFailure:
    """Case-insensitive, whitespace-tolerant parse of ``name(args)``.

    Anything outside the vocabulary comes back as a failure rather than an
    exception so the replan loop handles every bad plan the same way.
    """
    cleaned = text.strip().strip("\"'`").rstrip(".,;:!").strip().lower()
    cleaned = re.sub(r"\s+", " ", cleaned)
    m = _CALL_RE.match(cleaned)
    if not m:
        return _unknown(text)
    name, arg = m.group(1), m.group(2)
    arg = (arg or "").strip().strip("\"'")
    if name == PICKUP:
        if arg in (ONION, DISH):
            return pickup(arg)
        return SkillFailure(
            INVALID_OBJECT,
            f"I cannot pickup({arg}), since this is an invalid object.",
        )
    if name == WAIT:
        try:
            ticks = int(arg)
        except ValueError:
            return SkillFailure(
                INVALID_WAIT_COUNT,
                f"I cannot wait({arg}), since wait needs an integer num with 0 < num <= 20.",
            )
        return wait(ticks)
    if name in (PLACE_OBJ_ON_COUNTER, PUT_ONION_IN_POT, FILL_DISH_WITH_SOUP, DELIVER_SOUP):
        return Skill(name)  # optional argument tolerated and ignored
    return _unknown(text)


def _unknown(text: str) -> SkillFailure:
    shown = text.strip() or "<empty>"
    return SkillFailure(
        UNKNOWN_SKILL,
        f"I cannot do {shown}, since it is not one of the 6 allowed skills.",
    )


# ---------------------------------------------------------------------------
# Precondition checks (the verificator's check stage)


def _any_pot_cooking_or_ready(state: GameState) -> bool:
    return any(p.ready or p.cook_ticks_remaining is not None for p in state.pots)


def _any_pot_not_full(state: GameState) -> bool:
    return any(p.onions < 3 for p in state.pots)


def validate(state: GameState, player: int, skill: Skill) -> SkillFailure | None:
    """Return None when every precondition holds, else the first failure.

    Checks run hand-first then pot-state, the nesting order of the rule
    pseudocode, so the first reported failure is deterministic.
    """
    held = state.players[player].held
    name = skill.name
    if name == PICKUP:
        if held != NOTHING:
            return _fail(HAND_NOT_EMPTY, skill)
        if skill.obj not in (ONION, DISH):
            return _fail(INVALID_OBJECT, skill)
        if skill.obj == DISH and not _any_pot_cooking_or_ready(state):
            return _fail(NO_COOKING_OR_READY_SOUP, skill)
        return None
    if name == PUT_ONION_IN_POT:
        if held != ONION:
            return _fail(WRONG_HELD_OBJECT, skill, expected=ONION)
        if not _any_pot_not_full(state):
            return _fail(POT_FULL, skill)
        return None
    if name == FILL_DISH_WITH_SOUP:
        if held != DISH:
            return _fail(WRONG_HELD_OBJECT, skill, expected=DISH)
        if not _any_pot_cooking_or_ready(state):
            return _fail(NO_COOKING_OR_READY_SOUP, skill)
        return None
    if name == DELIVER_SOUP:
        if held != SOUP:
            return _fail(WRONG_HELD_OBJECT, skill, expected=SOUP)
        return None
    if name == PLACE_OBJ_ON_COUNTER:
        if held == NOTHING:
            return _fail(HAND_EMPTY, skill)
        if held == SOUP:
            return _fail(HOLDING_SOUP_MUST_DELIVER, skill)
        return None
    if name == WAIT:
        if not isinstance(skill.ticks, int) or not 0 < skill.ticks <= 20:
            return _fail(INVALID_WAIT_COUNT, skill)
        return None
    return _unknown(render_skill(skill))


def _fail(reason: str, skill: Skill, expected: str | None = None) -> SkillFailure:
    return SkillFailure(reason, _message(reason, skill, expected), expected)


def _message(reason: str, skill: Skill, expected: str | None) -> str:
    s = render_skill(skill)
    if reason == HAND_NOT_EMPTY:
        return f"I cannot {s}, since that hand is not empty."
    if reason == INVALID_OBJECT:
        return f"I cannot {s}, since this is an invalid object."
    if reason == NO_COOKING_OR_READY_SOUP:
        if skill.name == PICKUP:
            return ("If there isn't a cooking or ready soup in the current scene, "
                    "I shouldn't pickup(dish).")
        return (f"I cannot {s}, since I need to have a soup cooking or ready "
                "in the pot.")
    if reason == WRONG_HELD_OBJECT:
        if expected == ONION:
            return f"I cannot {s}, since I need to have an onion in hand."
        if expected == DISH:
            return f"I cannot {s}, since I need to pickup(dish) first or have a dish in hand."
        return f"I cannot {s}, since I need to have soup in hand."
    if reason == POT_FULL:
        return f"I cannot {s}, since every pot is full: a pot is full when it contains 3 onions."
    if reason == HAND_EMPTY:
        return f"I cannot {s}, since I need to have something in hand."
    if reason == HOLDING_SOUP_MUST_DELIVER:
        return ("I cannot place_obj_on_counter() when I hold a dish with soup! "
                "I must do deliver_soup().")
    if reason == INVALID_WAIT_COUNT:
        return f"I cannot {s}, since wait needs an integer num with 0 < num <= 20."
    return f"I cannot {s}."


def explain_failure(skill: Skill | None, failure: SkillFailure) -> str:
    """Single-sentence first-person explanation, ready to append to a replan
    prompt."""
    if failure.message:
        return failure.message
    if skill is None:
        return "I cannot do that skill."
    return _message(failure.reason, skill, failure.expected)
