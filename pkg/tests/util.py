"""Shared test helpers: state builders for arbitrary scenarios."""

from __future__ import annotations

from coopkitchen.engine import GameState, NOTHING, PlayerState, PotState
from coopkitchen.layout import GridLayout, Position


def make_state(
    layout: GridLayout,
    players: list[tuple[tuple[int, int], str, str]] | None = None,
    pots: dict[tuple[int, int], tuple[int, int | None, bool]] | None = None,
    counters: dict[tuple[int, int], str] | None = None,
    tick: int = 0,
    score: int = 0,
) -> GameState:
    """Build a GameState: players as ((x, y), facing, held), pots as
    (x, y) -> (onions, cook_ticks_remaining, ready)."""
    if players is None:
        players = [
            ((s.pos.x, s.pos.y), s.facing, NOTHING) for s in layout.starts
        ]
    player_states = tuple(
        PlayerState(Position(*pos), facing, held) for pos, facing, held in players
    )
    pot_overrides = pots or {}
    pot_states = []
    for pos in sorted(layout.pots, key=lambda p: (p.y, p.x)):
        onions, cook, ready = pot_overrides.get((pos.x, pos.y), (0, None, False))
        pot_states.append(PotState(pos, onions, cook, ready))
    counter_items = tuple(
        sorted(
            ((Position(*pos), obj) for pos, obj in (counters or {}).items()),
            key=lambda kv: (kv[0].y, kv[0].x),
        )
    )
    return GameState(
        layout=layout,
        players=player_states,
        pots=tuple(pot_states),
        counters=counter_items,
        tick=tick,
        score=score,
    )


def open_room(width: int = 7, height: int = 7) -> GridLayout:
    """All-counter border around empty floor; no validation, for engine tests."""
    cells = []
    for y in range(height):
        for x in range(width):
            border = x in (0, width - 1) or y in (0, height - 1)
            cells.append("counter" if border else "empty")
    return GridLayout.from_cells("open_room", width, height, cells)
