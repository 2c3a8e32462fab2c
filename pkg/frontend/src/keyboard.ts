// Keyboard bindings come from the server's action-space `key` fields
// (movement on W/A/S/D, the rest from the derived pool).  Arrow keys alias
// the first directional action's inputs as a convenience.

import type { ActionEntry } from "./types.js";

const ARROW_INPUT: Record<string, string> = {
  ArrowLeft: "left",
  ArrowRight: "right",
  ArrowDown: "down",
  ArrowUp: "up",
};

export function buildKeyMap(actionSpace: ActionEntry[]): Map<string, number> {
  const map = new Map<string, number>();
  for (const entry of actionSpace) {
    if (entry.key) map.set(entry.key.toUpperCase(), entry.id);
  }
  const firstDirectional = new Map<string, number>();
  for (const entry of actionSpace) {
    if (entry.input && !firstDirectional.has(entry.input)) {
      firstDirectional.set(entry.input, entry.id);
    }
  }
  for (const [arrow, input] of Object.entries(ARROW_INPUT)) {
    const id = firstDirectional.get(input);
    if (id !== undefined) map.set(arrow, id);
  }
  return map;
}

/** Action id for a KeyboardEvent key, or null when unbound. */
export function actionForKey(keyMap: Map<string, number>, key: string): number | null {
  if (key in ARROW_INPUT) return keyMap.get(key) ?? null;
  if (key.length !== 1) return null;
  return keyMap.get(key.toUpperCase()) ?? null;
}
