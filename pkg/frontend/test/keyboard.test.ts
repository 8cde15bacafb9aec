import { describe, expect, it } from "vitest";

import { keyToAction } from "../src/keyboard.js";

describe("keyboard bindings", () => {
  it("maps arrows to the four moves and spacebar to INTERACT", () => {
    expect(keyToAction("ArrowUp")).toBe("NORTH");
    expect(keyToAction("ArrowDown")).toBe("SOUTH");
    expect(keyToAction("ArrowLeft")).toBe("WEST");
    expect(keyToAction("ArrowRight")).toBe("EAST");
    expect(keyToAction(" ")).toBe("INTERACT");
    expect(keyToAction("Space")).toBe("INTERACT");
  });

  it("accepts WASD aliases in either case", () => {
    expect(keyToAction("w")).toBe("NORTH");
    expect(keyToAction("a")).toBe("WEST");
    expect(keyToAction("s")).toBe("SOUTH");
    expect(keyToAction("d")).toBe("EAST");
    expect(keyToAction("W")).toBe("NORTH");
    expect(keyToAction("D")).toBe("EAST");
  });

  it("ignores everything else", () => {
    for (const key of ["Enter", "Escape", "q", "1", "Shift", "F5"]) {
      expect(keyToAction(key)).toBeNull();
    }
  });
});
