// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import type { FrameMessage } from "../src/protocol.js";
import {
  cookCountdown,
  frameToGrid,
  gridToText,
  parseLayoutGrid,
  renderGridDom,
  renderReasoningDom,
  renderStatusDom,
} from "../src/render.js";
import fixtureJson from "./fixtures/cramped_room_frame.json";

// positions in JSON are plain arrays; narrow the fixture once
const fixture = fixtureJson as unknown as {
  layout: { name: string; width: number; height: number; grid: string };
  initial_frame: FrameMessage;
  initial_expected_render: string;
  later_frame: FrameMessage;
  later_expected_render: string;
  cooking_frame: FrameMessage;
  cooking_expected_render: string;
};

const base = parseLayoutGrid(fixture.layout.grid);

describe("grid projection", () => {
  it("decodes the static layout grid", () => {
    expect(base.length).toBe(fixture.layout.height);
    expect(base[0].length).toBe(fixture.layout.width);
    expect(base[0][2]).toBe("P");
    expect(base[3][1]).toBe("D");
    expect(base[3][3]).toBe("S");
  });

  it("matches the server's rendering of the initial frame cell-for-cell", () => {
    const grid = frameToGrid(base, fixture.initial_frame);
    expect(gridToText(grid)).toBe(fixture.initial_expected_render);
  });

  it("matches the server's rendering of a mid-episode frame", () => {
    const grid = frameToGrid(base, fixture.later_frame);
    expect(gridToText(grid)).toBe(fixture.later_expected_render);
  });

  it("shows pot fill and held objects for a cooking frame", () => {
    const frame = fixture.cooking_frame;
    const grid = frameToGrid(base, frame);
    expect(gridToText(grid)).toBe(fixture.cooking_expected_render);
    expect(gridToText(grid)).toContain("P{øøø");
    expect(gridToText(grid)).toContain("→0d");
    expect(cookCountdown(frame)).toBe(7);
  });
});

describe("DOM rendering", () => {
  it("renders one cell per grid position with a timer overlay when cooking", () => {
    const container = document.createElement("div");
    renderGridDom(container, base, fixture.cooking_frame);
    const cells = container.querySelectorAll(".cell");
    expect(cells.length).toBe(fixture.layout.width * fixture.layout.height);
    const potCell = container.querySelector(".cell.pot") as HTMLElement;
    expect(potCell.dataset.timer).toBe("7");
    expect(potCell.textContent).toContain("P{");
  });

  it("renders score, tick and cook countdown", () => {
    const container = document.createElement("div");
    renderStatusDom(container, fixture.cooking_frame);
    expect(container.textContent).toContain("tick 0");
    expect(container.textContent).toContain("score 0");
    expect(container.textContent).toContain("soup ready in 7");
  });

  it("shows the agent reasoning verbatim", () => {
    const container = document.createElement("div");
    renderReasoningDom(container, fixture.later_frame);
    const reasoning = fixture.later_frame.reasoning;
    expect(reasoning).not.toBeNull();
    expect(container.textContent).toContain(reasoning!.plan);
    expect(container.textContent).toContain(reasoning!.belief);
    expect(container.textContent).toContain("Plan for Player 1:");
  });

  it("explains when no reasoning has arrived yet", () => {
    const container = document.createElement("div");
    renderReasoningDom(container, fixture.initial_frame);
    expect(container.textContent).toContain("not planned yet");
  });
});
