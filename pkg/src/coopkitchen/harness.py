"""Cross-play evaluation protocol and statistics.

Every ordered pair of policies (self-pairs included) runs on every layout for
a fixed number of episodes; episode ``i`` of any cell always uses seed
``base + i``, so results are identical no matter how cells are scheduled.
Summaries report both sample standard deviation and standard error, and
per-seat rows average across partners excluding self-pairs.
"""

from __future__ import annotations

import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .orchestrator import EpisodeResult, parse_policy_spec, run_episode

REMOTE_FAULT_ABORT = 2  # episodes with remote planner faults before a cell aborts


@dataclass
class CellResult:
    episodes: list[dict] = field(default_factory=list)
    incomplete: bool = False
    abort_reason: str | None = None


@dataclass
class PairingMatrix:
    policies: list[str]
    layouts: list[str]
    episodes_per_cell: int
    horizon: int
    base_seed: int
    cells: dict[tuple[str, str, str], CellResult] = field(default_factory=dict)

    def cell(self, p0: str, p1: str, layout: str) -> CellResult:
        return self.cells[(p0, p1, layout)]

    def total_episodes(self) -> int:
        return sum(len(c.episodes) for c in self.cells.values())

    def expected_episodes(self) -> int:
        return len(self.policies) ** 2 * len(self.layouts) * self.episodes_per_cell

    def has_incomplete(self) -> bool:
        return any(c.incomplete for c in self.cells.values())

    def to_json(self) -> dict:
        return {
            "policies": self.policies,
            "layouts": self.layouts,
            "episodes_per_cell": self.episodes_per_cell,
            "horizon": self.horizon,
            "base_seed": self.base_seed,
            "cells": [
                {
                    "p0": p0, "p1": p1, "layout": layout,
                    "episodes": cell.episodes,
                    "incomplete": cell.incomplete,
                    "abort_reason": cell.abort_reason,
                }
                for (p0, p1, layout), cell in sorted(self.cells.items())
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "PairingMatrix":
        matrix = PairingMatrix(
            policies=list(data["policies"]),
            layouts=list(data["layouts"]),
            episodes_per_cell=data["episodes_per_cell"],
            horizon=data["horizon"],
            base_seed=data["base_seed"],
        )
        for cell in data["cells"]:
            matrix.cells[(cell["p0"], cell["p1"], cell["layout"])] = CellResult(
                episodes=cell["episodes"],
                incomplete=cell["incomplete"],
                abort_reason=cell.get("abort_reason"),
            )
        return matrix


def _slim(result: EpisodeResult) -> dict:
    remote_faults = sum(
        agent.get("planner_faults", 0)
        for agent, spec in zip(result.agents, result.policies)
        if "backend=remote" in spec
    )
    return {
        "seed": result.seed,
        "reward": result.total_reward,
        "deliveries": result.deliveries,
        "trace_hash": result.trace_hash,
        "policy_faults": result.policy_faults,
        "remote_faults": remote_faults,
    }


def _safe_name(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", text)


def _run_cell(p0: str, p1: str, layout: str, episodes: int, horizon: int,
              base_seed: int, log_dir: str | None) -> CellResult:
    cell = CellResult()
    remote_faulted = 0
    for i in range(episodes):
        result = run_episode(layout, (p0, p1), seed=base_seed + i, horizon=horizon)
        slim = _slim(result)
        cell.episodes.append(slim)
        if log_dir is not None:
            name = f"{_safe_name(layout)}__{_safe_name(p0)}__{_safe_name(p1)}__ep{i}.json"
            Path(log_dir, name).write_text(
                json.dumps(result.to_json()), encoding="utf-8"
            )
        if slim["remote_faults"] > 0:
            remote_faulted += 1
            if remote_faulted >= REMOTE_FAULT_ABORT:
                cell.incomplete = True
                cell.abort_reason = (
                    f"aborted after {remote_faulted} episodes with remote faults"
                )
                break
    return cell


def cross_play(policies: list[str], layouts: list[str], episodes: int,
               horizon: int, base_seed: int, *, workers: int = 1,
               log_dir: str | Path | None = None) -> PairingMatrix:
    """Run episodes for every ordered policy pair on every layout."""
    if not policies or not layouts:
        raise ValueError("need at least one policy and one layout")
    for spec in policies:
        parse_policy_spec(spec)  # fail fast on bad grammar
    if log_dir is not None:
        Path(log_dir).mkdir(parents=True, exist_ok=True)
        log_dir = str(log_dir)

    matrix = PairingMatrix(
        policies=list(policies), layouts=list(layouts),
        episodes_per_cell=episodes, horizon=horizon, base_seed=base_seed,
    )
    keys = [
        (p0, p1, layout)
        for layout in layouts for p0 in policies for p1 in policies
    ]
    if workers <= 1:
        for p0, p1, layout in keys:
            matrix.cells[(p0, p1, layout)] = _run_cell(
                p0, p1, layout, episodes, horizon, base_seed, log_dir
            )
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                key: pool.submit(_run_cell, *key, episodes, horizon, base_seed, log_dir)
                for key in keys
            }
            for key, future in futures.items():
                matrix.cells[key] = future.result()
    return matrix


# ---------------------------------------------------------------------------
# Statistics


def mean_sd_se(values: list[float]) -> tuple[float, float, float]:
    n = len(values)
    if n == 0:
        return float("nan"), float("nan"), float("nan")
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    sd = math.sqrt(var)
    return mean, sd, sd / math.sqrt(n)


@dataclass
class Summary:
    cells: list[dict]
    seats: list[dict]
    heatmaps: dict[str, dict]
    incomplete_cells: list[dict]

    def to_json(self) -> dict:
        return {
            "cells": self.cells,
            "seats": self.seats,
            "heatmaps": self.heatmaps,
            "incomplete_cells": self.incomplete_cells,
        }


def summarize(matrix: PairingMatrix) -> Summary:
    """Pure function of the matrix; re-summarizing saved data is byte-stable."""
    cells = []
    incomplete = []
    for (p0, p1, layout), cell in sorted(matrix.cells.items()):
        rewards = [e["reward"] for e in cell.episodes]
        mean, sd, se = mean_sd_se(rewards)
        row = {
            "layout": layout, "p0": p0, "p1": p1, "episodes": len(rewards),
            "mean": mean, "sd": sd, "se": se, "incomplete": cell.incomplete,
        }
        cells.append(row)
        if cell.incomplete:
            incomplete.append({
                "layout": layout, "p0": p0, "p1": p1,
                "reason": cell.abort_reason,
            })

    seats = []
    for layout in matrix.layouts:
        for policy in matrix.policies:
            for seat in (0, 1):
                rewards: list[float] = []
                any_incomplete = False
                for partner in matrix.policies:
                    if partner == policy:
                        continue  # self-pairs sit on the diagonal, excluded
                    key = (policy, partner, layout) if seat == 0 else (partner, policy, layout)
                    cell = matrix.cells.get(key)
                    if cell is None:
                        continue
                    rewards.extend(e["reward"] for e in cell.episodes)
                    any_incomplete = any_incomplete or cell.incomplete
                mean, sd, se = mean_sd_se(rewards)
                seats.append({
                    "layout": layout, "policy": policy, "seat": seat,
                    "episodes": len(rewards), "mean": mean, "sd": sd, "se": se,
                    "incomplete": any_incomplete,
                })

    heatmaps = {}
    for layout in matrix.layouts:
        grid = []
        for p0 in matrix.policies:
            row = []
            for p1 in matrix.policies:
                cell = matrix.cells.get((p0, p1, layout))
                if cell is None or not cell.episodes:
                    row.append(None)
                else:
                    row.append(mean_sd_se([e["reward"] for e in cell.episodes])[0])
            grid.append(row)
        heatmaps[layout] = {"policies": list(matrix.policies), "grid": grid}

    return Summary(cells=cells, seats=seats, heatmaps=heatmaps,
                   incomplete_cells=incomplete)


# ---------------------------------------------------------------------------
# Delimited output


def write_cells_csv(summary: Summary, path: str | Path) -> None:
    lines = ["layout,p0,p1,episodes,mean,sd,se,incomplete"]
    for row in summary.cells:
        lines.append(
            f"{row['layout']},{row['p0']},{row['p1']},{row['episodes']},"
            f"{row['mean']:.6g},{row['sd']:.6g},{row['se']:.6g},{row['incomplete']}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_seats_csv(summary: Summary, path: str | Path) -> None:
    lines = ["layout,policy,seat,episodes,mean,sd,se,incomplete"]
    for row in summary.seats:
        lines.append(
            f"{row['layout']},{row['policy']},{row['seat']},{row['episodes']},"
            f"{row['mean']:.6g},{row['sd']:.6g},{row['se']:.6g},{row['incomplete']}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
