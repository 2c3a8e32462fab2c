// RenderMap -> DOM tiles.  Tiles are flat colored squares keyed by tile
// name; wall-style tiles pick one of 16 border variants from the autotile
// bitmask (N=1, E=2, S=4, W=8: edges are drawn where no same-object
// neighbor continues the run).

import type { ObjectInfo, RenderMap, RenderTile } from "./types.js";

const ORIENTATION_ARROW: Record<string, string> = {
  up: "↑",
  right: "→",
  left: "←",
  down: "",
};

/** Deterministic pastel for a tile key. */
export function colorForTile(tileKey: string): string {
  let hash = 2166136261;
  for (let i = 0; i < tileKey.length; i++) {
    hash = (hash ^ tileKey.charCodeAt(i)) >>> 0;
    hash = Math.imul(hash, 16777619) >>> 0;
  }
  const hue = hash % 360;
  const lightness = 42 + (hash % 23);
  return `hsl(${hue}, 65%, ${lightness}%)`;
}

function tileElement(doc: Document, tile: RenderTile): HTMLElement {
  const el = doc.createElement("div");
  el.className = "tile";
  el.dataset.object = tile.object;
  el.style.background = colorForTile(tile.tile);
  el.textContent = tile.object[0]?.toUpperCase() ?? "?";
  const arrow = ORIENTATION_ARROW[tile.orientation] ?? "";
  if (arrow) el.textContent += arrow;
  if (tile.autotile !== null) {
    el.dataset.autotile = String(tile.autotile);
    const edges: string[] = [];
    if (!(tile.autotile & 1)) edges.push("border-top");
    if (!(tile.autotile & 2)) edges.push("border-right");
    if (!(tile.autotile & 4)) edges.push("border-bottom");
    if (!(tile.autotile & 8)) edges.push("border-left");
    el.classList.add(...edges);
  }
  return el;
}

/** Render a map into a container as a CSS grid of stacked tiles. */
export function renderBoard(container: HTMLElement, render: RenderMap): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  container.style.setProperty("--cols", String(render.width));
  for (let y = 0; y < render.height; y++) {
    for (let x = 0; x < render.width; x++) {
      const cell = doc.createElement("div");
      cell.className = "board-cell";
      cell.dataset.x = String(x);
      cell.dataset.y = String(y);
      for (const tile of render.cells[y][x]) {
        cell.appendChild(tileElement(doc, tile));
      }
      container.appendChild(cell);
    }
  }
}

/** Build a RenderMap client-side from a level string (thumbnails and the
 * editor preview reuse the board renderer without a server round trip). */
export function renderMapFromLevelString(
  text: string,
  objects: ObjectInfo[],
): RenderMap {
  const byChar = new Map(objects.map((o) => [o.map_char, o]));
  const lines = text.split("\n");
  while (lines.length && lines[lines.length - 1].trim() === "") lines.pop();
  const width = Math.max(1, ...lines.map((line) => line.length));
  const height = Math.max(1, lines.length);

  const occupied = (x: number, y: number, name: string): boolean => {
    const ch = lines[y]?.[x];
    return ch !== undefined && byChar.get(ch)?.name === name;
  };

  const cells: RenderTile[][][] = [];
  for (let y = 0; y < height; y++) {
    const row: RenderTile[][] = [];
    for (let x = 0; x < width; x++) {
      const ch = lines[y]?.[x];
      const info = ch !== undefined ? byChar.get(ch) : undefined;
      if (!info) {
        row.push([]);
        continue;
      }
      let autotile: number | null = null;
      if (info.autotile) {
        autotile =
          (occupied(x, y - 1, info.name) ? 1 : 0) |
          (occupied(x + 1, y, info.name) ? 2 : 0) |
          (occupied(x, y + 1, info.name) ? 4 : 0) |
          (occupied(x - 1, y, info.name) ? 8 : 0);
      }
      row.push([{ object: info.name, tile: info.tile, orientation: "down", autotile }]);
    }
    cells.push(row);
  }
  return { width, height, cells };
}
