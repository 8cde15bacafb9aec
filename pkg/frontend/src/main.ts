/** Browser entry point: wires the real WebSocket, DOM, and keyboard. */

import { GameClient, type SocketLike } from "./client.js";
import {
  parseLayoutGrid,
  renderGridDom,
  renderReasoningDom,
  renderStatusDom,
} from "./render.js";

interface LayoutEntry {
  name: string;
  width: number;
  height: number;
  grid: string;
}

function browserSocket(url: string): SocketLike {
  const ws = new WebSocket(url);
  const wrapper: SocketLike = {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
    onerror: null,
  };
  ws.onopen = () => wrapper.onopen?.();
  ws.onmessage = (event) => wrapper.onmessage?.(String(event.data));
  ws.onclose = () => wrapper.onclose?.();
  ws.onerror = () => wrapper.onerror?.();
  return wrapper;
}

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

async function boot(): Promise<void> {
  const apiBase = window.location.origin;
  const wsUrl = apiBase.replace(/^http/, "ws") + "/ws";

  const layoutSelect = el<HTMLSelectElement>("layout");
  const seatSelect = el<HTMLSelectElement>("seat");
  const opponentInput = el<HTMLInputElement>("opponent");
  const startButton = el<HTMLButtonElement>("start");
  const banner = el<HTMLDivElement>("banner");
  const gridEl = el<HTMLDivElement>("grid");
  const statusEl = el<HTMLDivElement>("status");
  const reasoningEl = el<HTMLDivElement>("reasoning");
  const finishedEl = el<HTMLDivElement>("finished");

  const layouts: LayoutEntry[] = await (await fetch(apiBase + "/layouts")).json();
  const grids = new Map(layouts.map((l) => [l.name, parseLayoutGrid(l.grid)]));
  for (const layout of layouts) {
    const option = document.createElement("option");
    option.value = layout.name;
    option.textContent = layout.name;
    layoutSelect.appendChild(option);
  }

  let client: GameClient | null = null;

  function startSession(): void {
    finishedEl.textContent = "";
    banner.textContent = "";
    const layoutName = layoutSelect.value;
    const base = grids.get(layoutName);
    if (!base) return;
    client = new GameClient(wsUrl, browserSocket, {
      onStatus: (status) => {
        banner.textContent =
          status === "disconnected" ? "connection lost - press Start to reconnect"
          : status === "error" ? `protocol error: ${client?.lastError?.message ?? ""}`
          : "";
        if (status === "lobby" && client) {
          client.start(
            layoutName,
            Number(seatSelect.value) === 1 ? 1 : 0,
            opponentInput.value || "proagent:backend=scripted",
          );
        }
      },
      onFrame: (frame) => {
        renderGridDom(gridEl, base, frame);
        renderStatusDom(statusEl, frame);
        renderReasoningDom(reasoningEl, frame);
      },
      onFinished: (message) => {
        const link = document.createElement("a");
        link.href = `${apiBase}/logs/${message.log_ref}`;
        link.textContent = `final score ${message.score} - episode log ${message.log_ref}`;
        finishedEl.textContent = "";
        finishedEl.appendChild(link);
      },
    });
    client.connect();
  }

  startButton.addEventListener("click", startSession);
  document.addEventListener("keydown", (event) => {
    if (!client) return;
    const sent = client.handleKey(event.key);
    if (sent) event.preventDefault();
  });
}

boot().catch((error) => {
  document.body.textContent = `failed to start: ${error}`;
});
