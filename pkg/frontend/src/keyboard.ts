/** Keyboard bindings: arrows map to the four moves, spacebar interacts,
 * and WASD is accepted as an alias set. One keypress, one action. */

import type { Action } from "./protocol.js";

const BINDINGS: Record<string, Action> = {
  ArrowUp: "NORTH",
  ArrowDown: "SOUTH",
  ArrowLeft: "WEST",
  ArrowRight: "EAST",
  " ": "INTERACT",
  Space: "INTERACT",
  w: "NORTH",
  s: "SOUTH",
  a: "WEST",
  d: "EAST",
};

export function keyToAction(key: string): Action | null {
  const direct = BINDINGS[key];
  if (direct) return direct;
  const lower = BINDINGS[key.toLowerCase()];
  return lower ?? null;
}
