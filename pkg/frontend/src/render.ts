/** Pure view projection: a frame plus the server-provided static grid become
 * display tokens, then DOM. No game rules live here; the client never
 * predicts state, it renders exactly what the last frame said. The token
 * conventions (8-char stride, arrow+index+held tag, pot fill marks) match
 * the server's own text rendering byte for byte. */

import type { FrameMessage, Held } from "./protocol.js";

const STRIDE = 8;

const FACING_ARROW: Record<string, string> = {
  N: "↑", S: "↓", W: "←", E: "→",
};

const HELD_TAG: Record<Held, string> = {
  nothing: "",
  onion: "o",
  dish: "d",
  soup: "{øøø",
};

const BASE_CLASS: Record<string, string> = {
  "": "floor",
  X: "counter",
  O: "onion-dispenser",
  P: "pot",
  D: "dish-dispenser",
  S: "serving",
};

/** Decode the static grid text served by GET /layouts (8-char stride). */
export function parseLayoutGrid(grid: string): string[][] {
  const lines = grid.split("\n");
  const width = Math.max(...lines.map((l) => Math.ceil(l.length / STRIDE)));
  return lines.map((line) => {
    const row: string[] = [];
    for (let x = 0; x < width; x++) {
      row.push(line.slice(x * STRIDE, (x + 1) * STRIDE).trim());
    }
    return row;
  });
}

/** Overlay the dynamic frame state onto the static grid tokens. */
export function frameToGrid(base: string[][], frame: FrameMessage): string[][] {
  const grid = base.map((row) => [...row]);
  for (const counter of frame.state.counters) {
    const [x, y] = counter.pos;
    grid[y][x] = "X" + HELD_TAG[counter.object];
  }
  for (const pot of frame.state.pots) {
    const [x, y] = pot.pos;
    if (pot.onions > 0) {
      grid[y][x] = "P{" + "ø".repeat(pot.onions);
    }
  }
  frame.state.players.forEach((player, index) => {
    const [x, y] = player.pos;
    grid[y][x] = FACING_ARROW[player.facing] + String(index) + HELD_TAG[player.held];
  });
  return grid;
}

/** Canonical text form; equals the server's rendering of the same state. */
export function gridToText(grid: string[][]): string {
  return grid
    .map((row) => row.map((token) => token.padEnd(STRIDE)).join("").replace(/\s+$/, ""))
    .join("\n");
}

export function cookCountdown(frame: FrameMessage): number | null {
  const remaining = frame.state.pots
    .map((pot) => pot.cook_ticks_remaining)
    .filter((t): t is number => t !== null);
  return remaining.length ? Math.min(...remaining) : null;
}

/** Rebuild the grid DOM from display tokens. */
export function renderGridDom(
  container: HTMLElement,
  base: string[][],
  frame: FrameMessage,
): void {
  const grid = frameToGrid(base, frame);
  container.textContent = "";
  container.classList.add("kitchen-grid");
  grid.forEach((row, y) => {
    const rowEl = container.ownerDocument.createElement("div");
    rowEl.className = "kitchen-row";
    row.forEach((token, x) => {
      const cell = container.ownerDocument.createElement("span");
      const baseToken = base[y][x];
      cell.className = "cell " + (BASE_CLASS[baseToken] ?? "floor");
      cell.textContent = token;
      const pot = frame.state.pots.find(
        (p) => p.pos[0] === x && p.pos[1] === y,
      );
      if (pot && pot.cook_ticks_remaining !== null) {
        cell.dataset.timer = String(pot.cook_ticks_remaining);
        cell.title = `cooking, ${pot.cook_ticks_remaining} timesteps left`;
      }
      if (pot && pot.ready) {
        cell.dataset.ready = "true";
      }
      rowEl.appendChild(cell);
    });
    container.appendChild(rowEl);
  });
}

export function renderStatusDom(container: HTMLElement, frame: FrameMessage): void {
  const countdown = cookCountdown(frame);
  const parts = [`tick ${frame.tick}`, `score ${frame.score}`];
  parts.push(countdown === null ? "no soup cooking" : `soup ready in ${countdown}`);
  container.textContent = parts.join(" | ");
}

/** The interpretability surface: the agent's latest reasoning, verbatim. */
export function renderReasoningDom(container: HTMLElement, frame: FrameMessage): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  if (!frame.reasoning) {
    container.textContent = "(the agent has not planned yet)";
    return;
  }
  const rows: Array<[string, string]> = [
    ["analysis", frame.reasoning.analysis],
    ["belief", frame.reasoning.belief],
    ["plan", frame.reasoning.plan],
    ["completion", frame.reasoning.completion],
  ];
  for (const [label, text] of rows) {
    const block = doc.createElement("pre");
    block.className = `reasoning-${label}`;
    block.textContent = `${label}: ${text}`;
    container.appendChild(block);
  }
}
