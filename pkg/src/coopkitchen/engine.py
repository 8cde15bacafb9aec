"""Deterministic two-player kitchen simulation.

``step`` is a pure function from (state, action pair) to the successor
state, the reward delta, and the list of events that occurred this tick.
Identical inputs always produce identical outputs, and swapping the two
players (positions, held objects, and actions) swaps the resulting player
states exactly: movement conflicts resolve symmetrically (both stay), and
simultaneous INTERACTs are evaluated against the pre-tick state, with
same-cell conflicts either merged (when the effects commute, e.g. two
onion deposits that fit) or both dropped.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import NamedTuple

from .layout import (
    COUNTER,
    DISH_DISPENSER,
    EMPTY,
    GridLayout,
    ONION_DISPENSER,
    POT,
    Position,
    SERVING,
)

# Held-object vocabulary; "soup" is a dish filled with soup.
NOTHING = "nothing"
ONION = "onion"
DISH = "dish"
SOUP = "soup"

NORTH = "NORTH"
SOUTH = "SOUTH"
WEST = "WEST"
EAST = "EAST"
INTERACT = "INTERACT"
STAY = "STAY"
ACTIONS = (NORTH, SOUTH, WEST, EAST, INTERACT, STAY)
MOVE_ACTIONS = (NORTH, SOUTH, WEST, EAST)

_ACTION_TO_FACING = {NORTH: "N", SOUTH: "S", WEST: "W", EAST: "E"}
_MOVE_SET = frozenset((NORTH, SOUTH, WEST, EAST))
DELTAS = {"N": (0, -1), "S": (0, 1), "W": (-1, 0), "E": (1, 0)}

# Benchmark-compatible defaults; both are plain config constants because the
# source material never pins them.
DELIVERY_REWARD = 20
COOK_TICKS = 20

EV_PICKED_UP = "picked_up"
EV_PLACED_ON_COUNTER = "placed_on_counter"
EV_ONION_IN_POT = "onion_in_pot"
EV_COOK_STARTED = "cook_started"
EV_SOUP_READY = "soup_ready"
EV_FILLED_DISH = "filled_dish"
EV_DELIVERED = "delivered"
EV_BLOCKED = "blocked"
EV_NOOP = "noop"


class PlayerState(NamedTuple):
    pos: Position
    facing: str  # N, S, W, E
    held: str  # nothing, onion, dish, soup


class PotState(NamedTuple):
    pos: Position
    onions: int
    cook_ticks_remaining: int | None
    ready: bool


class Event(NamedTuple):
    kind: str
    player: int | None
    obj: str | None = None
    pos: Position | None = None


@dataclass(frozen=True)
class GameState:
    layout: GridLayout
    players: tuple[PlayerState, PlayerState]
    pots: tuple[PotState, ...]
    counters: tuple[tuple[Position, str], ...]  # sorted by (y, x)
    tick: int
    score: int

    def player(self, index: int) -> PlayerState:
        return self.players[index]

    def pot_at(self, pos: Position) -> PotState:
        for pot in self.pots:
            if pot.pos == pos:
                return pot
        raise KeyError(f"no pot at {pos}")

    def counter_object(self, pos: Position) -> str | None:
        for cpos, obj in self.counters:
            if cpos == pos:
                return obj
        return None


def initial_state(layout: GridLayout) -> GameState:
    players = tuple(
        PlayerState(start.pos, start.facing, NOTHING) for start in layout.starts
    )
    pots = tuple(
        PotState(pos, 0, None, False)
        for pos in sorted(layout.pots, key=lambda p: (p.y, p.x))
    )
    return GameState(
        layout=layout, players=players, pots=pots, counters=(), tick=0, score=0
    )


def faced_cell(player: PlayerState) -> Position:
    dx, dy = DELTAS[player.facing]
    return Position(player.pos.x + dx, player.pos.y + dy)


# ---------------------------------------------------------------------------
# Step


def step(
    state: GameState,
    a0: str,
    a1: str,
    *,
    cook_ticks: int = COOK_TICKS,
    delivery_reward: int = DELIVERY_REWARD,
) -> tuple[GameState, int, list[Event]]:
    """Advance one tick. Total: every action pair yields a successor."""
    actions = (a0, a1)
    for a in actions:
        if a not in ACTIONS:
            raise ValueError(f"unknown action {a!r}")
    layout = state.layout
    events: list[Event] = []

    if a0 in _MOVE_SET or a1 in _MOVE_SET:
        players, move_events = _resolve_movement(layout, state.players, actions)
        events.extend(move_events)
    else:
        players = state.players

    pots = {pot.pos: pot for pot in state.pots}
    counters = dict(state.counters)
    counters_changed = False
    fresh_pots: set[Position] = set()
    score = state.score

    effects = [
        _interact_effect(state, players[i], i) if actions[i] == INTERACT else None
        for i in range(2)
    ]
    effects = _drop_conflicts(state, effects)

    new_players = list(players)
    for i, effect in enumerate(effects):
        if effect is None:
            if actions[i] == INTERACT:
                events.append(Event(EV_NOOP, i))
            continue
        kind = effect[0]
        if kind == "gain":
            _, obj, pos = effect
            new_players[i] = new_players[i]._replace(held=obj)
            events.append(Event(EV_PICKED_UP, i, obj, pos))
        elif kind == "pickup_counter":
            _, obj, pos = effect
            new_players[i] = new_players[i]._replace(held=obj)
            del counters[pos]
            counters_changed = True
            events.append(Event(EV_PICKED_UP, i, obj, pos))
        elif kind == "place":
            _, obj, pos = effect
            new_players[i] = new_players[i]._replace(held=NOTHING)
            counters[pos] = obj
            counters_changed = True
            events.append(Event(EV_PLACED_ON_COUNTER, i, obj, pos))
        elif kind == "deposit":
            _, pos = effect
            pot = pots[pos]
            pots[pos] = pot._replace(onions=pot.onions + 1)
            new_players[i] = new_players[i]._replace(held=NOTHING)
            events.append(Event(EV_ONION_IN_POT, i, ONION, pos))
        elif kind == "fill":
            _, pos = effect
            pots[pos] = PotState(pos, 0, None, False)
            new_players[i] = new_players[i]._replace(held=SOUP)
            events.append(Event(EV_FILLED_DISH, i, SOUP, pos))
        elif kind == "deliver":
            new_players[i] = new_players[i]._replace(held=NOTHING)
            score += delivery_reward
            events.append(Event(EV_DELIVERED, i, SOUP, effect[1]))

    for pos, pot in pots.items():
        if pot.onions == 3 and pot.cook_ticks_remaining is None and not pot.ready:
            pots[pos] = pot._replace(cook_ticks_remaining=cook_ticks)
            fresh_pots.add(pos)
            events.append(Event(EV_COOK_STARTED, None, None, pos))

    # Timers decrement after interactions resolve; a pot that started cooking
    # this tick keeps its full countdown.
    for pos, pot in pots.items():
        if pot.cook_ticks_remaining is None or pos in fresh_pots:
            continue
        remaining = pot.cook_ticks_remaining - 1
        if remaining == 0:
            pots[pos] = pot._replace(cook_ticks_remaining=None, ready=True)
            events.append(Event(EV_SOUP_READY, None, None, pos))
        else:
            pots[pos] = pot._replace(cook_ticks_remaining=remaining)

    if counters_changed:
        new_counters = tuple(sorted(counters.items(), key=lambda kv: (kv[0].y, kv[0].x)))
    else:
        new_counters = state.counters
    next_state = GameState(
        layout=layout,
        players=(new_players[0], new_players[1]),
        pots=tuple(pots[pot.pos] for pot in state.pots),
        counters=new_counters,
        tick=state.tick + 1,
        score=score,
    )
    return next_state, score - state.score, events


def _resolve_movement(
    layout: GridLayout,
    players: tuple[PlayerState, PlayerState],
    actions: tuple[str, str],
) -> tuple[tuple[PlayerState, PlayerState], list[Event]]:
    """Two-phase commit: propose targets, veto conflicts, then apply.

    Same-target conflicts and position swaps leave both players in place; a
    move into a cell being vacated this tick succeeds only if the vacating
    move itself succeeds.
    """
    events: list[Event] = []
    facings = list(p.facing for p in players)
    targets: list[Position | None] = [None, None]
    wall_blocked = [False, False]
    for i, action in enumerate(actions):
        if action in MOVE_ACTIONS:
            facings[i] = _ACTION_TO_FACING[action]
            dx, dy = DELTAS[facings[i]]
            tgt = Position(players[i].pos.x + dx, players[i].pos.y + dy)
            if layout.is_walkable(tgt):
                targets[i] = tgt
            else:
                wall_blocked[i] = True

    moved = [False, False]
    t0, t1 = targets
    p0, p1 = players[0].pos, players[1].pos
    if t0 is not None and t0 == t1:
        pass  # contested cell: both stay
    elif t0 == p1 and t1 == p0 and t0 is not None and t1 is not None:
        pass  # swap: both stay
    else:
        for i, other in ((0, 1), (1, 0)):
            tgt = targets[i]
            if tgt is None:
                continue
            if tgt != players[other].pos:
                moved[i] = True
        for i, other in ((0, 1), (1, 0)):
            tgt = targets[i]
            if tgt is not None and tgt == players[other].pos and moved[other]:
                moved[i] = True

    out = []
    for i in range(2):
        pos = targets[i] if moved[i] else players[i].pos
        out.append(PlayerState(pos, facings[i], players[i].held))
        attempted = actions[i] in MOVE_ACTIONS and (wall_blocked[i] or targets[i] is not None)
        if attempted and not moved[i]:
            events.append(Event(EV_BLOCKED, i))
    return (out[0], out[1]), events


def _interact_effect(state: GameState, player: PlayerState, index: int):
    """Tentative effect of one INTERACT, evaluated against the pre-tick state."""
    target = faced_cell(player)
    if not state.layout.in_bounds(target):
        return None
    kind = state.layout.cell_at(target)
    held = player.held
    if kind == ONION_DISPENSER:
        if held == NOTHING:
            return ("gain", ONION, target)
    elif kind == DISH_DISPENSER:
        if held == NOTHING:
            return ("gain", DISH, target)
    elif kind == POT:
        pot = state.pot_at(target)
        if held == ONION and pot.onions < 3:
            return ("deposit", target)
        if held == DISH and pot.ready:
            return ("fill", target)
    elif kind == SERVING:
        if held == SOUP:
            return ("deliver", target)
    elif kind == COUNTER:
        obj = state.counter_object(target)
        if obj is None and held != NOTHING:
            return ("place", held, target)
        if obj is not None and held == NOTHING:
            return ("pickup_counter", obj, target)
    return None


def _drop_conflicts(state: GameState, effects):
    """Symmetric same-cell conflict rule: commuting effects both apply,
    anything else drops both."""
    e0, e1 = effects
    if e0 is None or e1 is None:
        return effects
    pos0, pos1 = e0[-1], e1[-1]
    if pos0 != pos1:
        return effects
    k0, k1 = e0[0], e1[0]
    if k0 == "gain" and k1 == "gain":
        return effects  # dispensers are infinite
    if k0 == "deliver" and k1 == "deliver":
        return effects  # each consumes its own soup
    if k0 == "deposit" and k1 == "deposit":
        if state.pot_at(pos0).onions + 2 <= 3:
            return effects
        return (None, None)
    return (None, None)


# ---------------------------------------------------------------------------
# Snapshots and hashing


def state_snapshot(state: GameState) -> dict:
    """Documented JSON shape shared by episode logs, the wire protocol, and
    golden tests. See docs/wire_protocol.md."""
    return {
        "players": [
            {"pos": [p.pos.x, p.pos.y], "facing": p.facing, "held": p.held}
            for p in state.players
        ],
        "pots": [
            {
                "pos": [pot.pos.x, pot.pos.y],
                "onions": pot.onions,
                "cook_ticks_remaining": pot.cook_ticks_remaining,
                "ready": pot.ready,
            }
            for pot in state.pots
        ],
        "counters": [
            {"pos": [pos.x, pos.y], "object": obj} for pos, obj in state.counters
        ],
        "tick": state.tick,
        "score": state.score,
    }


def state_from_snapshot(layout: GridLayout, snap: dict) -> GameState:
    players = tuple(
        PlayerState(Position(*p["pos"]), p["facing"], p["held"])
        for p in snap["players"]
    )
    pots = tuple(
        PotState(
            Position(*p["pos"]), p["onions"], p["cook_ticks_remaining"], p["ready"]
        )
        for p in snap["pots"]
    )
    counters = tuple(
        (Position(*c["pos"]), c["object"]) for c in snap["counters"]
    )
    return GameState(
        layout=layout,
        players=players,
        pots=pots,
        counters=counters,
        tick=snap["tick"],
        score=snap["score"],
    )


def state_key(state: GameState):
    """Cheap canonical tuple for hashing and dict keys (layout excluded)."""
    return (
        tuple((p.pos.x, p.pos.y, p.facing, p.held) for p in state.players),
        tuple((p.pos.x, p.pos.y, p.onions, p.cook_ticks_remaining, p.ready)
              for p in state.pots),
        tuple((pos.x, pos.y, obj) for pos, obj in state.counters),
        state.tick,
        state.score,
    )


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class TraceHasher:
    """Accumulates a stable SHA-256 over an episode's evolution."""

    def __init__(self):
        self._h = hashlib.sha256()

    def update_state(self, state: GameState) -> None:
        self._h.update(repr(state_key(state)).encode())

    def update_step(self, actions: tuple[str, str], reward: int) -> None:
        self._h.update(repr((actions, reward)).encode())

    def hexdigest(self) -> str:
        return self._h.hexdigest()


def event_to_dict(event: Event) -> dict:
    return {
        "kind": event.kind,
        "player": event.player,
        "obj": event.obj,
        "pos": [event.pos.x, event.pos.y] if event.pos is not None else None,
    }


def event_from_dict(d: dict) -> Event:
    pos = Position(*d["pos"]) if d.get("pos") is not None else None
    return Event(d["kind"], d["player"], d.get("obj"), pos)
