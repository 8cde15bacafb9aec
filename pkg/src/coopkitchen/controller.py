"""Grounds a committed skill into per-tick actions via best-first search.

The search runs every tick (cost = steps, heuristic = Manhattan distance to
the nearest goal-adjacent cell), treating the teammate's current cell as a
hard obstacle, so teammate movement causes automatic detours. When blocking
the teammate leaves no route at all but one exists through their cell, the
first step of the unblocked path is emitted anyway: the engine bounces it
harmlessly if the teammate stays, and the stuck budget converts persistent
blockage into a failure.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, replace

from .engine import (
    EAST,
    EV_DELIVERED,
    EV_FILLED_DISH,
    EV_ONION_IN_POT,
    EV_PICKED_UP,
    EV_PLACED_ON_COUNTER,
    Event,
    GameState,
    INTERACT,
    NORTH,
    SOUTH,
    STAY,
    WEST,
)
from .layout import GridLayout, Position, reachable_cells
from .skills import (
    DELIVER_SOUP,
    FILL_DISH_WITH_SOUP,
    PICKUP,
    PLACE_OBJ_ON_COUNTER,
    PUT_ONION_IN_POT,
    Skill,
    WAIT,
    validate,
)

IN_PROGRESS = "in_progress"
SUCCEEDED = "succeeded"
FAILED = "failed"

NO_REACHABLE_TARGET = "no_reachable_target"
PATH_BLOCKED = "path_blocked"
PRECONDITION_LOST = "precondition_lost"

# Direction tie-break order is the movement-action listing order: N, S, W, E.
_DIRS = (("N", NORTH, (0, -1)), ("S", SOUTH, (0, 1)),
         ("W", WEST, (-1, 0)), ("E", EAST, (1, 0)))

_EXPECTED_EVENT = {
    PICKUP: EV_PICKED_UP,
    PUT_ONION_IN_POT: EV_ONION_IN_POT,
    FILL_DISH_WITH_SOUP: EV_FILLED_DISH,
    DELIVER_SOUP: EV_DELIVERED,
    PLACE_OBJ_ON_COUNTER: EV_PLACED_ON_COUNTER,
}

DEFAULT_STUCK_BUDGET = 10


@dataclass
class ControllerConfig:
    wait_mode: str = "stay"  # "stay" | "random_walk"
    stuck_budget: int = DEFAULT_STUCK_BUDGET
    rng: random.Random | None = None

    def random_action(self) -> str:
        rng = self.rng or random.Random(0)
        return rng.choice((NORTH, SOUTH, WEST, EAST, STAY))


@dataclass(frozen=True)
class SkillExecution:
    skill: Skill
    target: Position | None
    status: str = IN_PROGRESS
    failure_reason: str | None = None
    ticks_elapsed: int = 0
    stuck_ticks: int = 0
    pending: str | None = None  # intent of the last emitted action
    noop_interacts: int = 0

    @property
    def in_progress(self) -> bool:
        return self.status == IN_PROGRESS


# ---------------------------------------------------------------------------
# Target selection


def select_target(state: GameState, player: int, skill: Skill) -> Position | None:
    """Choose the feature cell this skill will interact with, or None when no
    candidate has a reachable adjacent cell."""
    if skill.name == WAIT:
        return None
    layout = state.layout
    me = state.players[player].pos
    teammate = state.players[1 - player].pos
    for blocked in (frozenset((teammate,)), frozenset()):
        dist = _distance_map(layout, me, blocked)
        best = _pick_candidate(state, player, skill, dist)
        if best is not None:
            return best
    return None


def _pick_candidate(state, player, skill, dist) -> Position | None:
    layout = state.layout

    def d(feature: Position) -> float:
        ns = layout.walkable_neighbors(feature)
        return min((dist.get(n, float("inf")) for n in ns), default=float("inf"))

    name = skill.name
    scored: list[tuple] = []
    if name == PUT_ONION_IN_POT:
        # Finish a pot before starting another: nearest, then most onions.
        scored = [((d(p.pos), -p.onions, p.pos.y, p.pos.x), p.pos)
                  for p in state.pots if p.onions < 3]
    elif name == FILL_DISH_WITH_SOUP:
        scored = [((0, 0, d(p.pos), p.pos.y, p.pos.x), p.pos)
                  for p in state.pots if p.ready]
        scored += [((1, p.cook_ticks_remaining, d(p.pos), p.pos.y, p.pos.x), p.pos)
                   for p in state.pots if p.cook_ticks_remaining is not None]
    elif name == PICKUP:
        sources = list(_dispensers(layout, skill.obj))
        sources += [pos for pos, obj in state.counters if obj == skill.obj]
        scored = [((d(pos), pos.y, pos.x), pos) for pos in sources]
    elif name == DELIVER_SOUP:
        scored = [((d(pos), pos.y, pos.x), pos) for pos in layout.serving_locs]
    elif name == PLACE_OBJ_ON_COUNTER:
        shared = shared_counters(layout)
        occupied = {pos for pos, _ in state.counters}
        scored = [((0 if pos in shared else 1, d(pos), pos.y, pos.x), pos)
                  for pos in layout.counters if pos not in occupied]
    else:
        return None
    reachable = [(key, pos) for key, pos in scored
                 if key[_dist_index(name)] != float("inf")]
    if not reachable:
        return None
    return min(reachable)[1]


def _dist_index(name: str) -> int:
    return {PUT_ONION_IN_POT: 0, FILL_DISH_WITH_SOUP: 2, PICKUP: 0,
            DELIVER_SOUP: 0, PLACE_OBJ_ON_COUNTER: 1}[name]


def _dispensers(layout: GridLayout, obj: str):
    return layout.onion_dispensers if obj == "onion" else layout.dish_dispensers


def shared_counters(layout: GridLayout) -> frozenset[Position]:
    """Counters adjacent to both players' reachable regions: where hand-offs
    can happen on split layouts."""
    r0 = reachable_cells(layout, layout.starts[0].pos)
    r1 = reachable_cells(layout, layout.starts[1].pos)
    out = []
    for pos in layout.counters:
        ns = layout.walkable_neighbors(pos)
        if any(n in r0 for n in ns) and any(n in r1 for n in ns):
            out.append(pos)
    return frozenset(out)


def _distance_map(layout: GridLayout, start: Position,
                  blocked: frozenset[Position]) -> dict[Position, int]:
    dist = {start: 0}
    frontier = [start]
    while frontier:
        nxt: list[Position] = []
        for pos in frontier:
            for _, _, (dx, dy) in _DIRS:
                n = Position(pos.x + dx, pos.y + dy)
                if n in dist or n in blocked or not layout.is_walkable(n):
                    continue
                dist[n] = dist[pos] + 1
                nxt.append(n)
        frontier = nxt
    return dist


# ---------------------------------------------------------------------------
# Path planning


def plan_path(state: GameState, player: int, target: Position,
              *, block_teammate: bool = True) -> list[Position] | None:
    """Best-first (A*) path to the nearest walkable cell adjacent to target.

    Returns the positions after each move (start excluded); [] when already
    adjacent. None when unreachable.
    """
    layout = state.layout
    me = state.players[player].pos
    blocked = frozenset((state.players[1 - player].pos,)) if block_teammate else frozenset()
    goals = {n for n in layout.walkable_neighbors(target) if n not in blocked}
    if me in goals:
        return []
    if not goals:
        return None

    def h(pos: Position) -> int:
        return min(abs(pos.x - g.x) + abs(pos.y - g.y) for g in goals)

    counter = 0
    open_heap: list[tuple[int, int, int, Position]] = [(h(me), 0, counter, me)]
    g_score = {me: 0}
    came: dict[Position, Position] = {}
    closed: set[Position] = set()
    while open_heap:
        _, g, _, pos = heapq.heappop(open_heap)
        if pos in closed:
            continue
        closed.add(pos)
        if pos in goals:
            path = [pos]
            while pos in came:
                pos = came[pos]
                path.append(pos)
            path.reverse()
            return path[1:]
        for _, _, (dx, dy) in _DIRS:
            n = Position(pos.x + dx, pos.y + dy)
            if n in blocked or not layout.is_walkable(n) or n in closed:
                continue
            tentative = g + 1
            if tentative < g_score.get(n, 1 << 30):
                g_score[n] = tentative
                came[n] = pos
                counter += 1
                heapq.heappush(open_heap, (tentative + h(n), tentative, counter, n))
    return None


def _adjacent(a: Position, b: Position) -> bool:
    return abs(a.x - b.x) + abs(a.y - b.y) == 1


def _direction_to(src: Position, dst: Position) -> str:
    for facing, action, (dx, dy) in _DIRS:
        if (src.x + dx, src.y + dy) == (dst.x, dst.y):
            return facing
    raise ValueError(f"{dst} is not adjacent to {src}")


def _action_for(facing: str) -> str:
    return {"N": NORTH, "S": SOUTH, "W": WEST, "E": EAST}[facing]


# ---------------------------------------------------------------------------
# Execution


def start_execution(state: GameState, player: int, skill: Skill) -> SkillExecution:
    if skill.name == WAIT:
        return SkillExecution(skill, None)
    target = select_target(state, player, skill)
    if target is None:
        return SkillExecution(skill, None, status=FAILED,
                              failure_reason=NO_REACHABLE_TARGET)
    return SkillExecution(skill, target)


def next_action(exec_: SkillExecution, state: GameState, player: int,
                config: ControllerConfig | None = None) -> tuple[str, SkillExecution]:
    """Emit this tick's action. Never outputs INTERACT unless the player is
    facing the selected target cell."""
    config = config or ControllerConfig()
    if not exec_.in_progress:
        return STAY, exec_
    if exec_.stuck_ticks >= config.stuck_budget:
        return STAY, replace(exec_, status=FAILED, failure_reason=PATH_BLOCKED)

    skill = exec_.skill
    if validate(state, player, skill) is not None:
        return STAY, replace(exec_, status=FAILED, failure_reason=PRECONDITION_LOST)
    if skill.name == WAIT:
        if config.wait_mode == "random_walk":
            return config.random_action(), replace(exec_, pending="hold")
        return STAY, replace(exec_, pending="hold")

    target = select_target(state, player, skill)
    if target is None:
        if exec_.ticks_elapsed == 0:
            return STAY, replace(exec_, status=FAILED,
                                 failure_reason=NO_REACHABLE_TARGET)
        return STAY, replace(exec_, pending="blocked")
    exec_ = replace(exec_, target=target)

    me = state.players[player]
    if _adjacent(me.pos, target):
        needed = _direction_to(me.pos, target)
        if me.facing != needed:
            return _action_for(needed), replace(exec_, pending="turn")
        if skill.name == FILL_DISH_WITH_SOUP and not state.pot_at(target).ready:
            return STAY, replace(exec_, pending="hold")  # cooking: wait it out
        if exec_.noop_interacts > 0 and player == 1 and exec_.noop_interacts % 2 == 1:
            return STAY, replace(exec_, pending="backoff")  # break interact races
        return INTERACT, replace(exec_, pending="interact")

    path = plan_path(state, player, target, block_teammate=True)
    if path is None:
        path = plan_path(state, player, target, block_teammate=False)
    if path is None:
        return STAY, replace(exec_, pending="blocked")
    step_dir = _direction_to(me.pos, path[0])
    return _action_for(step_dir), replace(exec_, pending="travel")


def observe_step(exec_: SkillExecution, prev_state: GameState,
                 next_state: GameState, events: list[Event],
                 player: int) -> SkillExecution:
    """Update execution status from what the engine reported for this tick."""
    if not exec_.in_progress:
        return exec_
    elapsed = exec_.ticks_elapsed + 1
    skill = exec_.skill
    if skill.name == WAIT:
        if elapsed >= (skill.ticks or 0):
            return replace(exec_, status=SUCCEEDED, ticks_elapsed=elapsed)
        return replace(exec_, ticks_elapsed=elapsed)
    if _completed(skill, events, player):
        return replace(exec_, status=SUCCEEDED, ticks_elapsed=elapsed)

    pending = exec_.pending
    stuck = exec_.stuck_ticks
    noops = exec_.noop_interacts
    moved = prev_state.players[player].pos != next_state.players[player].pos
    if pending == "travel":
        stuck = 0 if moved else stuck + 1
    elif pending == "blocked":
        stuck += 1
    elif pending == "interact":
        noops += 1
        stuck += 1
    elif pending in ("turn", "hold", "backoff"):
        stuck = 0 if pending != "backoff" else stuck
    return replace(exec_, ticks_elapsed=elapsed, stuck_ticks=stuck,
                   noop_interacts=noops)


def _completed(skill: Skill, events: list[Event], player: int) -> bool:
    kind = _EXPECTED_EVENT.get(skill.name)
    if kind is None:
        return False
    for ev in events:
        if ev.kind != kind or ev.player != player:
            continue
        if skill.name == PICKUP and ev.obj != skill.obj:
            continue
        return True
    return False
