from __future__ import annotations

import itertools
from pathlib import Path

import pytest

from coopkitchen.engine import DISH, NOTHING, ONION, SOUP, initial_state
from coopkitchen.lang import (
    ConfigError,
    DemoScene,
    KnowledgeLibrary,
    PromptBundle,
    assemble_prompt,
    build_knowledge_library,
    describe_layout,
    describe_state,
    load_default_demos,
)
from coopkitchen.layout import GridLayout, list_layouts, load_layout, render_layout

from util import make_state

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def cramped():
    return load_layout("cramped_room")


# ---------------------------------------------------------------------------
# Byte-exact language goldens


def test_layout_sentence_cramped_room(cramped):
    assert describe_layout(cramped) == (
        "Above is the layout of the kitchen: onion dispenser at (0, 1), "
        "onion dispenser at (4, 1), dish dispenser at (1, 3), pot at (2, 0), "
        "serving loc at (3, 3)."
    )


def test_state_sentence_both_holding_onions(cramped):
    state = make_state(
        cramped,
        players=[((1, 1), "E", ONION), ((2, 1), "W", ONION)],
    )
    assert describe_state(state) == (
        "State: Player 0 holds one onion. Player 1 holds one onion. "
        "Kitchen states: Pot (2, 0) is empty."
    )


def test_initial_state_holds_nothing(cramped):
    text = describe_state(initial_state(cramped))
    assert "Player 0 holds nothing." in text
    assert "Player 1 holds nothing." in text


def test_golden_files_all_layouts():
    for name in list_layouts():
        layout = load_layout(name)
        state = initial_state(layout)
        assert describe_layout(layout) + "\n" == (
            (GOLDEN / f"{name}_layout.txt").read_text(encoding="utf-8")
        )
        assert describe_state(state) + "\n" == (
            (GOLDEN / f"{name}_state.txt").read_text(encoding="utf-8")
        )
        assert render_layout(layout, state) + "\n" == (
            (GOLDEN / f"{name}_render.txt").read_text(encoding="utf-8")
        )


def test_single_pot_toy_grid_one_clause():
    grid = ["counter"] * 25
    for y in (1, 2, 3):
        for x in (1, 2, 3):
            grid[y * 5 + x] = "empty"
    grid[0 * 5 + 2] = "pot"
    layout = GridLayout.from_cells("toy", 5, 5, grid)
    text = describe_layout(layout)
    assert text.count("pot at") == 1
    assert "dispenser" not in text


def test_clause_count_matches_features_counter_circuit():
    layout = load_layout("counter_circuit")
    text = describe_layout(layout)
    expected = (len(layout.onion_dispensers) + len(layout.dish_dispensers)
                + len(layout.pots) + len(layout.serving_locs))
    assert text.count(" at (") == expected


def test_pot_clause_forms(cramped):
    def clause(pot):
        state = make_state(cramped, pots={(2, 0): pot})
        return describe_state(state).split("Kitchen states: ")[1]

    assert clause((0, None, False)) == "Pot (2, 0) is empty."
    assert clause((1, None, False)) == "Pot (2, 0) has 1 onion."
    assert clause((2, None, False)) == "Pot (2, 0) has 2 onions."
    assert clause((3, 15, False)) == "Pot (2, 0) is cooking, 15 timesteps left."
    assert clause((3, None, True)) == "Pot (2, 0) has a ready soup."


def test_counter_objects_included(cramped):
    state = make_state(cramped, counters={(2, 3): ONION})
    assert "Counter (2, 3) has one onion." in describe_state(state)


def test_state_description_injective(cramped):
    held_kinds = (NOTHING, ONION, DISH, SOUP)
    pot_kinds = [(0, None, False), (1, None, False), (2, None, False),
                 (3, 20, False), (3, 7, False), (3, None, True)]
    seen: dict[str, tuple] = {}
    for h0, h1, pot in itertools.product(held_kinds, held_kinds, pot_kinds):
        state = make_state(
            cramped,
            players=[((1, 2), "N", h0), ((3, 1), "N", h1)],
            pots={(2, 0): pot},
        )
        text = describe_state(state)
        key = (h0, h1, pot)
        assert text not in seen or seen[text] == key
        seen[text] = key


def test_angle_dialect_demo_compatible(cramped):
    state = make_state(
        cramped,
        players=[((1, 2), "N", ONION), ((3, 1), "N", NOTHING)],
        pots={(2, 0): (1, None, False)},
    )
    text = describe_state(state, dialect="angle")
    assert text.startswith("<Player 0> holds one onion.<Player 1> holds nothing.")
    assert "<Pot 0> has 1 onion." in text
    with pytest.raises(ConfigError):
        describe_state(state, dialect="pirate")


def test_positions_behind_debug_flag(cramped):
    state = initial_state(cramped)
    assert "(1, 2)" not in describe_state(state)
    assert "Player 0 is at (1, 2) facing N." in describe_state(
        state, include_positions=True
    )


# ---------------------------------------------------------------------------
# Knowledge library


def test_knowledge_library_default_contains_format_line(cramped):
    kl = build_knowledge_library(cramped)
    text = kl.render()
    assert "Plan for Player 0:" in text
    assert "def pickup(obj):" in text  # pseudocode rule style
    assert "Above is the layout of the kitchen:" in text
    assert "cannot communicate" in text
    assert "full when it contains 3 onions" in text


def test_rule_styles(cramped):
    text_style = build_knowledge_library(cramped, rule_style="text").render()
    assert "def pickup(obj):" not in text_style
    assert "I need to have nothing in hand." in text_style
    with pytest.raises(ConfigError):
        build_knowledge_library(cramped, rule_style="interpretive_dance")


def test_demos_optional(cramped):
    with_demos = build_knowledge_library(cramped)
    without = build_knowledge_library(cramped, include_demos=False)
    assert with_demos.demos and not without.demos
    assert without.task == with_demos.task
    assert without.rules == with_demos.rules
    assert "Scene 999" not in without.render()


def test_default_demos_parse():
    demos = load_default_demos()
    assert [d.tag for d in demos] == ["999", "888"]
    assert demos[0].plan == "put_onion_in_pot()"
    assert demos[1].plan == "pickup(onion)"
    assert demos[0].intention == "pickup(onion)"


def test_seat_rewrite_in_templates(cramped):
    kl = build_knowledge_library(cramped, me=1, teammate=0)
    text = kl.render()
    assert "control <Player 1>" in text
    assert "Plan for Player 1:" in text
    assert "Intention for Player 0:" in text


# ---------------------------------------------------------------------------
# Prompt assembly


def test_assemble_order_and_monotone_length(cramped):
    kl = build_knowledge_library(cramped, include_demos=False)
    scene = describe_state(initial_state(cramped))
    empty = assemble_prompt(kl, [], scene)
    assert empty.full_text() == kl.render() + "\n\n" + scene

    lines = [f"Scene {i}: fake block {i}" for i in range(4)]
    lengths = [
        len(assemble_prompt(kl, lines[:k], scene).full_text()) for k in range(5)
    ]
    assert lengths == sorted(lengths)
    bundle = assemble_prompt(kl, lines[:2], scene)
    text = bundle.full_text()
    assert text.index(lines[0]) < text.index(lines[1]) < text.index(scene)


def test_feedback_appended_last(cramped):
    kl = build_knowledge_library(cramped, include_demos=False)
    scene = describe_state(initial_state(cramped))
    bundle = assemble_prompt(kl, ["Scene 1: x"], scene, feedback="I cannot do that.")
    text = bundle.full_text()
    assert text.endswith("I cannot do that.")
    assert text.index(scene) < text.index("I cannot do that.")


def test_recent_two_blocks_between_knowledge_and_scene(cramped):
    kl = build_knowledge_library(cramped, include_demos=False)
    scene = "State: Player 0 holds nothing."
    bundle = assemble_prompt(kl, ["Scene 5: a", "Scene 6: b"], scene)
    user = bundle.user_text()
    assert user.count("Scene 5: a") == 1 and user.count("Scene 6: b") == 1
    assert user.index("Scene 5: a") < user.index("Scene 6: b") < user.index(scene)


def test_messages_shape(cramped):
    kl = build_knowledge_library(cramped, include_demos=False)
    bundle = assemble_prompt(kl, [], "State: x")
    messages = bundle.messages()
    assert [m["role"] for m in messages] == ["system", "user"]
    assert messages[0]["content"] == kl.render()
