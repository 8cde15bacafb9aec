/** Wire protocol types and message builders.
 *
 * Mirrors docs/wire_protocol.md exactly; the client never invents game
 * state, it only decodes what the server sends.
 */

export type Action = "NORTH" | "SOUTH" | "WEST" | "EAST" | "INTERACT" | "STAY";

export const ACTIONS: readonly Action[] = [
  "NORTH", "SOUTH", "WEST", "EAST", "INTERACT", "STAY",
];

export type Facing = "N" | "S" | "W" | "E";
export type Held = "nothing" | "onion" | "dish" | "soup";

export interface PlayerSnapshot {
  pos: [number, number];
  facing: Facing;
  held: Held;
}

export interface PotSnapshot {
  pos: [number, number];
  onions: number;
  cook_ticks_remaining: number | null;
  ready: boolean;
}

export interface CounterSnapshot {
  pos: [number, number];
  object: Held;
}

export interface StateSnapshot {
  players: PlayerSnapshot[];
  pots: PotSnapshot[];
  counters: CounterSnapshot[];
  tick: number;
  score: number;
}

export interface Reasoning {
  analysis: string;
  belief: string;
  plan: string;
  completion: string;
}

export interface FrameMessage {
  type: "frame";
  tick: number;
  score: number;
  state: StateSnapshot;
  reasoning: Reasoning | null;
}

export interface FinishedMessage {
  type: "finished";
  log_ref: string;
  score: number;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  message?: string;
}

export type ServerMessage = FrameMessage | FinishedMessage | ErrorMessage;

export function parseServerMessage(data: string): ServerMessage | null {
  let parsed: unknown;
  try {
    parsed = JSON.parse(data);
  } catch {
    return null;
  }
  if (typeof parsed !== "object" || parsed === null) return null;
  const message = parsed as Record<string, unknown>;
  switch (message.type) {
    case "frame":
      if (typeof message.tick !== "number" || typeof message.state !== "object") {
        return null;
      }
      return message as unknown as FrameMessage;
    case "finished":
      if (typeof message.log_ref !== "string") return null;
      return message as unknown as FinishedMessage;
    case "error":
      if (typeof message.code !== "string") return null;
      return message as unknown as ErrorMessage;
    default:
      return null;
  }
}

export function actionMessage(action: Action): string {
  return JSON.stringify({ type: "action", action });
}

export function startMessage(
  layout: string,
  seat: 0 | 1,
  opponent: string,
  seed?: number,
): string {
  const body: Record<string, unknown> = { type: "start", layout, seat, opponent };
  if (seed !== undefined) body.seed = seed;
  return JSON.stringify(body);
}
