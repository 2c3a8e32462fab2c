// Level gallery persisted in browser local storage.
// Schema: {version: 1, levels: [{name, level_string, gdy_hash}]}

import type { GalleryData, GalleryLevel } from "./types.js";

export const STORAGE_KEY = "gridforge.gallery";

export class Gallery {
  constructor(private storage: Storage) {}

  private read(): GalleryData {
    const raw = this.storage.getItem(STORAGE_KEY);
    if (!raw) return { version: 1, levels: [] };
    try {
      const data = JSON.parse(raw) as GalleryData;
      if (data.version !== 1 || !Array.isArray(data.levels)) {
        return { version: 1, levels: [] };
      }
      return data;
    } catch {
      return { version: 1, levels: [] };
    }
  }

  private write(data: GalleryData): void {
    this.storage.setItem(STORAGE_KEY, JSON.stringify(data));
  }

  list(): GalleryLevel[] {
    return this.read().levels;
  }

  get(name: string): GalleryLevel | undefined {
    return this.read().levels.find((level) => level.name === name);
  }

  /** Create or update a named level. */
  save(level: GalleryLevel): void {
    const data = this.read();
    const existing = data.levels.findIndex((l) => l.name === level.name);
    if (existing >= 0) {
      data.levels[existing] = level;
    } else {
      data.levels.push(level);
    }
    this.write(data);
  }

  remove(name: string): boolean {
    const data = this.read();
    const before = data.levels.length;
    data.levels = data.levels.filter((level) => level.name !== name);
    this.write(data);
    return data.levels.length < before;
  }
}
