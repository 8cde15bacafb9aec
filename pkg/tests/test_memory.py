from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from coopkitchen.memory import (
    ANNOTATED,
    Correction,
    OutOfOrderError,
    REPLACED,
    TrajectoryBuffer,
    TrajectoryEntry,
)
from coopkitchen.skills import PICKUP_DISH, PICKUP_ONION, PUT_ONION, render_skill


def entry(tick: int, belief=PICKUP_ONION, correction=None) -> TrajectoryEntry:
    return TrajectoryEntry(
        tick=tick,
        scene=f"State: scene {tick}.",
        analysis=f"analysis {tick}",
        belief=belief,
        own_skill=PUT_ONION,
        correction=correction,
    )


def test_append_evicts_oldest():
    buffer = TrajectoryBuffer(capacity=3)
    for t in range(4):
        buffer.append(entry(t))
    assert [e.tick for e in buffer.entries] == [1, 2, 3]


def test_append_to_empty():
    buffer = TrajectoryBuffer(capacity=5)
    buffer.append(entry(0))
    assert len(buffer) == 1


def test_out_of_order_append_rejected():
    buffer = TrajectoryBuffer(capacity=5)
    buffer.append(entry(3))
    with pytest.raises(OutOfOrderError):
        buffer.append(entry(3))
    with pytest.raises(OutOfOrderError):
        buffer.append(entry(1))


@given(st.lists(st.integers(min_value=0, max_value=10_000), unique=True,
                min_size=1, max_size=200))
def test_fifo_survivors_are_largest_ticks(ticks):
    ticks = sorted(ticks)
    buffer = TrajectoryBuffer(capacity=20)
    for t in ticks:
        buffer.append(entry(t))
    survivors = [e.tick for e in buffer.entries]
    assert survivors == ticks[-20:]


def test_retrieve_recent_k_clamps_and_orders():
    buffer = TrajectoryBuffer(capacity=10)
    for t in range(5):
        buffer.append(entry(t))
    assert buffer.retrieve_recent_k(0) == []
    assert len(buffer.retrieve_recent_k(99)) == 5
    blocks = buffer.retrieve_recent_k(2)
    assert "Scene 3:" in blocks[0] and "Scene 4:" in blocks[1]
    with pytest.raises(ValueError):
        buffer.retrieve_recent_k(-1)


def test_retrieval_does_not_mutate():
    buffer = TrajectoryBuffer(capacity=10)
    for t in range(3):
        buffer.append(entry(t))
    before = buffer.entries
    buffer.retrieve_recent_k(2)
    assert buffer.entries == before


def test_rendered_block_format():
    buffer = TrajectoryBuffer(capacity=10, me=0, teammate=1)
    buffer.append(entry(7))
    block = buffer.retrieve_recent_k(1)[0]
    assert block == (
        "Scene 7: State: scene 7.\n"
        "Analysis: analysis 7\n"
        "Intention for Player 1: pickup(onion)\n"
        "Plan for Player 0: put_onion_in_pot()"
    )


def test_replaced_correction_renders_observed_skill():
    buffer = TrajectoryBuffer(capacity=10)
    buffer.append(entry(1, belief=PICKUP_DISH,
                        correction=Correction(REPLACED, PUT_ONION)))
    block = buffer.retrieve_recent_k(1)[0]
    assert "Intention for Player 1: put_onion_in_pot()" in block
    assert "pickup(dish)" not in block


def test_annotated_correction_keeps_original_with_note():
    note = ("the previous prediction was incorrect; the teammate actually did "
            + render_skill(PUT_ONION))
    buffer = TrajectoryBuffer(capacity=10)
    buffer.append(entry(1, belief=PICKUP_DISH,
                        correction=Correction(ANNOTATED, PUT_ONION, note)))
    block = buffer.retrieve_recent_k(1)[0]
    assert "pickup(dish)" in block
    assert "actually did put_onion_in_pot()" in block


def test_seat_indices_in_render():
    buffer = TrajectoryBuffer(capacity=4, me=1, teammate=0)
    buffer.append(entry(2))
    block = buffer.retrieve_recent_k(1)[0]
    assert "Intention for Player 0:" in block
    assert "Plan for Player 1:" in block


def test_retrieval_strategy_interface():
    from coopkitchen.memory import RecentK

    buffer = TrajectoryBuffer(capacity=10)
    for t in range(6):
        buffer.append(entry(t))
    strategy = RecentK(3)
    blocks = buffer.retrieve(strategy)
    assert blocks == buffer.retrieve_recent_k(3)
    assert len(blocks) == 3
