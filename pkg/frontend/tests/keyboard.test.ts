import { describe, expect, it } from "vitest";

import { actionForKey, buildKeyMap } from "../src/keyboard.js";
import type { ActionEntry } from "../src/types.js";

const SOKOBAN_SPACE: ActionEntry[] = [
  { id: 0, action: "", input: "", label: "No-Op", key: null },
  { id: 1, action: "move", input: "left", label: "Move Left", key: "A" },
  { id: 2, action: "move", input: "right", label: "Move Right", key: "D" },
  { id: 3, action: "move", input: "down", label: "Move Down", key: "S" },
  { id: 4, action: "move", input: "up", label: "Move Up", key: "W" },
];

describe("key map", () => {
  it("binds the server-provided keys case-insensitively", () => {
    const map = buildKeyMap(SOKOBAN_SPACE);
    expect(actionForKey(map, "a")).toBe(1);
    expect(actionForKey(map, "A")).toBe(1);
    expect(actionForKey(map, "w")).toBe(4);
  });

  it("aliases arrows to the first directional action", () => {
    const map = buildKeyMap(SOKOBAN_SPACE);
    expect(actionForKey(map, "ArrowLeft")).toBe(1);
    expect(actionForKey(map, "ArrowUp")).toBe(4);
  });

  it("returns null for unbound keys", () => {
    const map = buildKeyMap(SOKOBAN_SPACE);
    expect(actionForKey(map, "z")).toBeNull();
    expect(actionForKey(map, "Enter")).toBeNull();
  });

  it("binds unary action keys", () => {
    const map = buildKeyMap([
      ...SOKOBAN_SPACE,
      { id: 5, action: "interact_with_object", input: "", label: "Interact With Object", key: "E" },
    ]);
    expect(actionForKey(map, "e")).toBe(5);
  });
});
