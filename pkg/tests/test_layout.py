from __future__ import annotations

import pytest

from coopkitchen.engine import initial_state
from coopkitchen.layout import (
    COUNTER,
    DISH_DISPENSER,
    DuplicatePlayerError,
    EMPTY,
    GridLayout,
    MissingPlayerError,
    NonRectangularError,
    ONION_DISPENSER,
    POT,
    Position,
    SERVING,
    UnknownSymbolError,
    UnreachableFeatureError,
    list_layouts,
    load_layout,
    parse_layout,
    reachable_cells,
    render_layout,
    validate_layout,
)

from oracles import flood_fill
from util import make_state

CRAMPED_SOURCE = """
X X P X X
O E E ^1 O
X ^0 E E X
X D X S X
"""

# The printed expanded grid (blank interleave, unicode arrows, 8-char stride).
CRAMPED_EXPANDED = (
    "X       X       P       X       X       \n"
    "\n"
    "O                       ↑1      O       \n"
    "\n"
    "X       ↑0                      X       \n"
    "\n"
    "X       D       X       S       X  \n"
)


def test_cramped_room_feature_positions():
    layout = parse_layout(CRAMPED_SOURCE, name="cramped_room")
    assert layout.width == 5 and layout.height == 4
    assert layout.pots == (Position(2, 0),)
    assert set(layout.onion_dispensers) == {Position(0, 1), Position(4, 1)}
    assert layout.dish_dispensers == (Position(1, 3),)
    assert layout.serving_locs == (Position(3, 3),)
    assert layout.starts[0].pos == Position(1, 2)
    assert layout.starts[0].facing == "N"
    assert layout.starts[1].pos == Position(3, 1)
    assert layout.starts[1].facing == "N"


def test_cramped_room_feature_counts():
    layout = load_layout("cramped_room")
    assert len(layout.pots) == 1
    assert len(layout.onion_dispensers) == 2
    assert len(layout.dish_dispensers) == 1
    assert len(layout.serving_locs) == 1


def test_parse_accepts_printed_expanded_form():
    layout = parse_layout(CRAMPED_EXPANDED, name="expanded")
    reference = load_layout("cramped_room")
    assert layout.cells == reference.cells
    assert layout.starts == reference.starts


def test_unknown_symbol_rejected():
    with pytest.raises(UnknownSymbolError) as info:
        parse_layout("X X P X X\nO E Q ^1 O\nX ^0 E E X\nX D X S X")
    assert info.value.char == "Q"
    assert (info.value.row, info.value.col) == (1, 2)


def test_non_rectangular_rejected():
    with pytest.raises(NonRectangularError):
        parse_layout("X X P X X\nO E E ^1 O\nX ^0 E E\nX D X S X")


def test_missing_and_duplicate_players():
    with pytest.raises(MissingPlayerError):
        parse_layout("X X P X X\nO E E E O\nX ^0 E E X\nX D X S X")
    with pytest.raises(DuplicatePlayerError):
        parse_layout("X X P X X\nO E E ^0 O\nX ^0 E E X\nX D X S X")


def test_forced_coordination_split_regions_parse():
    layout = load_layout("forced_coordination")
    r0 = reachable_cells(layout, layout.starts[0].pos)
    r1 = reachable_cells(layout, layout.starts[1].pos)
    assert not (r0 & r1), "the two sides must be disjoint"
    # left side has no pots or serving spots reachable; right side has them
    assert all(not any(n in r0 for n in layout.walkable_neighbors(p))
               for p in layout.pots)
    assert all(any(n in r1 for n in layout.walkable_neighbors(p))
               for p in layout.pots)


def test_walled_off_pot_is_unreachable():
    # Forced Coordination variant where the pot column is sealed behind counters.
    source = """
X X X P X
O E X X P
O ^0 X ^1 X
D E X X X
X X X S X
"""
    with pytest.raises(UnreachableFeatureError) as info:
        parse_layout(source)
    assert info.value.kind == POT


def test_reachability_matches_flood_fill_oracle():
    for name in list_layouts():
        layout = load_layout(name)
        for start in layout.starts:
            assert reachable_cells(layout, start.pos) == flood_fill(layout, start.pos)


def test_render_initial_cramped_room_expanded_block():
    layout = load_layout("cramped_room")
    rendered = render_layout(layout, initial_state(layout))
    assert rendered == (
        "X       X       P       X       X\n"
        "O                       ↑1      O\n"
        "X       ↑0                      X\n"
        "X       D       X       S       X"
    )
    assert len(rendered.splitlines()) == 4


def test_render_all_counter_grid():
    cells = [COUNTER] * 9
    layout = GridLayout.from_cells("block", 3, 3, cells)
    rendered = render_layout(layout)
    assert rendered.splitlines() == ["X       X       X"] * 3


def test_render_shows_held_objects_and_pot_fill():
    layout = load_layout("cramped_room")
    state = make_state(
        layout,
        players=[((2, 2), "E", "dish"), ((2, 1), "E", "onion")],
        pots={(2, 0): (3, None, True)},
    )
    rendered = render_layout(layout, state)
    assert "P{øøø" in rendered
    assert "→0d" in rendered
    assert "→1o" in rendered


def test_render_parse_round_trip_all_layouts():
    for name in list_layouts():
        layout = load_layout(name)
        rendered = render_layout(layout, initial_state(layout))
        recovered = parse_layout(rendered, name=name)
        assert recovered.cells == layout.cells
        assert recovered.starts == layout.starts


def test_all_shipped_layouts_validate():
    for name in list_layouts():
        validate_layout(load_layout(name))
    assert set(list_layouts()) == {
        "cramped_room", "asymmetric_advantages", "coordination_ring",
        "forced_coordination", "counter_circuit",
    }


def test_ascii_and_unicode_arrows_equivalent():
    a = parse_layout("X X P X X\nO E E ^1 O\nX ^0 E E X\nX D X S X")
    b = parse_layout("X X P X X\nO E E ↑1 O\nX ↑0 E E X\nX D X S X")
    assert a.cells == b.cells and a.starts == b.starts


def test_compact_char_form():
    layout = parse_layout("XXPXX\nOEE^1O\nX^0EEX\nXDXSX")
    reference = load_layout("cramped_room")
    assert layout.cells == reference.cells
    assert layout.starts == reference.starts


def test_comment_lines_ignored():
    layout = parse_layout("# a comment\n" + CRAMPED_SOURCE + "\n# trailing\n")
    assert layout.pots == (Position(2, 0),)
