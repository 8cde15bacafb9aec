/** Session client: socket lifecycle, key handling, message dispatch.
 *
 * The socket is injected so tests can drive the client with a fake or a
 * loopback server. The client holds no game state beyond the last frame;
 * on reconnect it simply renders whatever the server sends next, which is
 * what makes a dropped connection impossible to desync.
 */

import { keyToAction } from "./keyboard.js";
import {
  actionMessage,
  parseServerMessage,
  startMessage,
  type Action,
  type ErrorMessage,
  type FinishedMessage,
  type FrameMessage,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((data: string) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ClientStatus =
  | "idle"
  | "connecting"
  | "lobby"
  | "running"
  | "finished"
  | "disconnected"
  | "error";

export interface ClientCallbacks {
  onStatus?: (status: ClientStatus) => void;
  onFrame?: (frame: FrameMessage) => void;
  onFinished?: (message: FinishedMessage) => void;
  onError?: (message: ErrorMessage) => void;
}

export class GameClient {
  status: ClientStatus = "idle";
  lastFrame: FrameMessage | null = null;
  finished: FinishedMessage | null = null;
  lastError: ErrorMessage | null = null;

  private socket: SocketLike | null = null;

  constructor(
    private readonly url: string,
    private readonly socketFactory: SocketFactory,
    private readonly callbacks: ClientCallbacks = {},
  ) {}

  connect(): void {
    this.setStatus("connecting");
    const socket = this.socketFactory(this.url);
    this.socket = socket;
    socket.onopen = () => this.setStatus("lobby");
    socket.onmessage = (data) => this.handleMessage(data);
    socket.onclose = () => {
      this.socket = null;
      if (this.status !== "finished" && this.status !== "error") {
        this.setStatus("disconnected");
      }
    };
    socket.onerror = () => {
      if (this.status !== "finished") {
        this.setStatus("disconnected");
      }
    };
  }

  start(layout: string, seat: 0 | 1, opponent: string, seed?: number): void {
    if (!this.socket) throw new Error("not connected");
    this.socket.send(startMessage(layout, seat, opponent, seed));
    this.setStatus("running");
  }

  /** One keypress sends at most one action message; returns the action. */
  handleKey(key: string): Action | null {
    const action = keyToAction(key);
    if (!action || this.status !== "running" || !this.socket) {
      return null;
    }
    this.socket.send(actionMessage(action));
    return action;
  }

  disconnect(): void {
    this.socket?.close();
    this.socket = null;
  }

  private handleMessage(data: string): void {
    const message = parseServerMessage(data);
    if (!message) return;
    if (message.type === "frame") {
      this.lastFrame = message;
      this.callbacks.onFrame?.(message);
    } else if (message.type === "finished") {
      this.finished = message;
      this.setStatus("finished");
      this.callbacks.onFinished?.(message);
    } else {
      this.lastError = message;
      this.setStatus("error");
      this.callbacks.onError?.(message);
    }
  }

  private setStatus(status: ClientStatus): void {
    this.status = status;
    this.callbacks.onStatus?.(status);
  }
}
