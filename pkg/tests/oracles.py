"""Independent oracles, written against the documented rules rather than the
implementation: movement resolution reference table, flood-fill reachability,
breadth-first shortest paths, and a brute-force skill execution check."""

from __future__ import annotations

from collections import deque

from coopkitchen.controller import (
    ControllerConfig,
    FAILED,
    IN_PROGRESS,
    SUCCEEDED,
    next_action,
    observe_step,
    start_execution,
)
from coopkitchen.engine import GameState, STAY, step
from coopkitchen.layout import GridLayout, Position
from coopkitchen.skills import Skill

_DELTAS = {"NORTH": (0, -1), "SOUTH": (0, 1), "WEST": (-1, 0), "EAST": (1, 0)}


def reference_move_resolution(
    layout: GridLayout,
    positions: tuple[Position, Position],
    actions: tuple[str, str],
) -> tuple[Position, Position]:
    """Double-entry reimplementation of the documented movement rules:
    walls block; same-target and swaps leave both in place; stepping into a
    cell being vacated works only if the vacating move itself succeeds."""
    targets: list[Position | None] = []
    for pos, action in zip(positions, actions):
        delta = _DELTAS.get(action)
        if delta is None:
            targets.append(None)
            continue
        candidate = Position(pos.x + delta[0], pos.y + delta[1])
        targets.append(candidate if layout.is_walkable(candidate) else None)

    t0, t1 = targets
    p0, p1 = positions
    if t0 is not None and t0 == t1:
        return positions
    if t0 == p1 and t1 == p0 and t0 is not None:
        return positions
    moves = [t0, t1]
    ok = [False, False]
    for i, other in ((0, 1), (1, 0)):
        if moves[i] is not None and moves[i] != positions[other]:
            ok[i] = True
    for i, other in ((0, 1), (1, 0)):
        if moves[i] is not None and moves[i] == positions[other] and ok[other]:
            ok[i] = True
    return (
        moves[0] if ok[0] else p0,
        moves[1] if ok[1] else p1,
    )


def flood_fill(layout: GridLayout, start: Position) -> set[Position]:
    if not layout.is_walkable(start):
        return set()
    seen = {start}
    queue = deque([start])
    while queue:
        pos = queue.popleft()
        for dx, dy in ((0, -1), (0, 1), (-1, 0), (1, 0)):
            n = Position(pos.x + dx, pos.y + dy)
            if n not in seen and layout.is_walkable(n):
                seen.add(n)
                queue.append(n)
    return seen


def bfs_distance_to_feature(
    layout: GridLayout,
    start: Position,
    feature: Position,
    blocked: set[Position] = frozenset(),
) -> int | None:
    """Shortest number of moves to reach any walkable cell adjacent to
    feature, or None when unreachable."""
    goals = {
        n for n in layout.walkable_neighbors(feature) if n not in blocked
    }
    if not goals:
        return None
    if start in goals:
        return 0
    dist = {start: 0}
    queue = deque([start])
    while queue:
        pos = queue.popleft()
        for dx, dy in ((0, -1), (0, 1), (-1, 0), (1, 0)):
            n = Position(pos.x + dx, pos.y + dy)
            if n in dist or n in blocked or not layout.is_walkable(n):
                continue
            dist[n] = dist[pos] + 1
            if n in goals:
                return dist[n]
            queue.append(n)
    return None


def brute_force_completes(
    state: GameState, player: int, skill: Skill, budget: int = 50
) -> bool:
    """Can the controller actually finish this skill within the budget
    against a stationary teammate (ignoring what validate says)?"""
    execution = start_execution(state, player, skill)
    config = ControllerConfig()
    for _ in range(budget):
        if execution.status == SUCCEEDED:
            return True
        if execution.status == FAILED:
            return False
        action, execution = next_action(execution, state, player, config)
        if execution.status != IN_PROGRESS:
            continue
        a0, a1 = (action, STAY) if player == 0 else (STAY, action)
        next_state, _, events = step(state, a0, a1)
        execution = observe_step(execution, state, next_state, events, player)
        state = next_state
    return execution.status == SUCCEEDED
