// Pure editing-grid model behind the tile-painting level editor.
//
// The canvas auto-grows by one row/column when a tile is painted on the
// right or bottom boundary, so there is always room to keep drawing.  The
// level string is the canvas with trailing all-empty rows and columns
// trimmed (the growth margin), which is the canonical form the gallery and
// the engine consume: painting h, b, A in a row yields exactly "hbA".

export const EMPTY_CHAR = ".";

export class EditorGrid {
  private cells: (string | null)[][];

  constructor(width: number, height: number) {
    if (width < 1 || height < 1) throw new Error("grid needs at least one cell");
    this.cells = Array.from({ length: height }, () => Array(width).fill(null));
  }

  get width(): number {
    return this.cells[0].length;
  }

  get height(): number {
    return this.cells.length;
  }

  objectAt(x: number, y: number): string | null {
    return this.cells[y]?.[x] ?? null;
  }

  static fromLevelString(text: string, charToObject: Map<string, string>): EditorGrid {
    const lines = text.replace(/\r\n/g, "\n").split("\n");
    while (lines.length && lines[lines.length - 1].trim() === "") lines.pop();
    if (!lines.length) return new EditorGrid(3, 3);
    const width = Math.max(...lines.map((line) => line.length), 1);
    const grid = new EditorGrid(width, lines.length);
    lines.forEach((line, y) => {
      for (let x = 0; x < line.length; x++) {
        const ch = line[x];
        if (ch === EMPTY_CHAR || ch === " ") continue;
        const object = charToObject.get(ch);
        if (object === undefined) throw new Error(`unknown level character '${ch}' at (${x}, ${y})`);
        grid.cells[y][x] = object;
      }
    });
    return grid;
  }

  /** Place (or erase, with null) the brush object; grows the canvas when
   * painting on the right or bottom boundary. */
  paint(x: number, y: number, objectName: string | null): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) {
      throw new Error(`cell (${x}, ${y}) outside the canvas`);
    }
    this.cells[y][x] = objectName;
    if (objectName !== null) {
      if (x === this.width - 1) {
        for (const row of this.cells) row.push(null);
      }
      if (y === this.height - 1) {
        this.cells.push(Array(this.width).fill(null));
      }
    }
  }

  /** Canonical level string: trailing all-empty rows/columns trimmed. */
  toLevelString(objectToChar: Map<string, string>): string {
    let maxX = -1;
    let maxY = -1;
    this.cells.forEach((row, y) =>
      row.forEach((cell, x) => {
        if (cell !== null) {
          if (x > maxX) maxX = x;
          if (y > maxY) maxY = y;
        }
      }),
    );
    if (maxY < 0) return "";
    const lines: string[] = [];
    for (let y = 0; y <= maxY; y++) {
      let line = "";
      for (let x = 0; x <= maxX; x++) {
        const object = this.cells[y][x];
        if (object === null) {
          line += EMPTY_CHAR;
        } else {
          const ch = objectToChar.get(object);
          if (ch === undefined) throw new Error(`object ${object} has no map character`);
          line += ch;
        }
      }
      lines.push(line);
    }
    return lines.join("\n");
  }

  resize(width: number, height: number): void {
    const fresh = new EditorGrid(width, height);
    for (let y = 0; y < Math.min(height, this.height); y++) {
      for (let x = 0; x < Math.min(width, this.width); x++) {
        fresh.cells[y][x] = this.cells[y][x];
      }
    }
    this.cells = fresh.cells;
  }

  clear(): void {
    for (const row of this.cells) row.fill(null);
  }
}
