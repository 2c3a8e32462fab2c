// @vitest-environment jsdom
//
// Scripted UI drive against a live server: paint the push puzzle in the
// editor, read back the level string, play the one-push solution with a
// simulated keypress, and verify the exported trajectory with the
// headless CLI.

import { spawnSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GridforgeApp } from "../src/app.js";
import { GridforgeClient } from "../src/api.js";
import { assetText, startServer, type LiveServer } from "./server.js";

const REPO_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..", "..");
const SOKOBAN_GDY = join(REPO_ROOT, "src", "gridforge", "assets", "sokoban.gdy");

let server: LiveServer;
let app: GridforgeApp;

function el<T extends HTMLElement>(id: string): T {
  return app.els[id] as T;
}

function clickBrush(name: string): void {
  const button = [...el("palette").querySelectorAll<HTMLElement>("button.brush")].find(
    (b) => b.dataset.brush === name,
  );
  if (!button) throw new Error(`no brush ${name}`);
  button.click();
}

function clickCell(x: number, y: number): void {
  const cell = el("board").querySelector<HTMLElement>(
    `.board-cell[data-x="${x}"][data-y="${y}"]`,
  );
  if (!cell) throw new Error(`no cell (${x}, ${y})`);
  cell.click();
}

async function pressKey(key: string): Promise<void> {
  document.dispatchEvent(new KeyboardEvent("keydown", { key, bubbles: true }));
  await app.idle();
}

beforeAll(async () => {
  server = await startServer();
  const root = document.createElement("div");
  document.body.appendChild(root);
  app = new GridforgeApp(root, new GridforgeClient(server.baseUrl), {
    seed: 7,
    replayDelayMs: 0,
  });
  await app.applyGdy(assetText("sokoban"));
  await app.idle();
});

afterAll(() => server?.stop());

describe("editor round trip", () => {
  it("boots a session from the GDY pane", () => {
    expect(el("env-name").textContent).toBe("sokoban");
    expect(app.session?.action_space).toHaveLength(5);
    // Level 0 loads into the editor on apply.
    expect(app.levelString().startsWith("wwwwwww")).toBe(true);
  });

  it("paints hbA and reads back the level string", async () => {
    await app.setLevelString("...");
    await app.idle();
    clickBrush("hole");
    clickCell(0, 0);
    clickBrush("box");
    clickCell(1, 0);
    clickBrush("avatar");
    clickCell(2, 0);
    expect(app.levelString()).toBe("hbA");
  });

  it("string pane edits re-render the grid", async () => {
    const pane = el<HTMLTextAreaElement>("level-string");
    pane.value = "hbA";
    pane.dispatchEvent(new Event("change", { bubbles: true }));
    await app.idle();
    const tiles = el("board").querySelectorAll(".tile");
    expect(tiles.length).toBe(3);
    expect(app.grid.objectAt(0, 0)).toBe("hole");
    expect(app.grid.objectAt(2, 0)).toBe("avatar");
  });

  it("plays the one-push solution via simulated keypress and the exported trajectory verifies", async () => {
    // Record from the painted level: the record button resets and arms the recorder.
    el("record-btn").click();
    await app.idle();
    expect(app.recording).toBe(true);

    await pressKey("a"); // Move Left: push the box into the hole
    expect(app.view?.status).toBe("running"); // fresh board after auto-stop reset
    expect(el("banner").hidden).toBe(false);
    expect(el("banner").textContent).toContain("win");

    const pane = el<HTMLTextAreaElement>("trajectory-pane").value;
    const trajectory = JSON.parse(pane);
    expect(trajectory.actions).toEqual([1]);
    expect(trajectory.total_reward).toBe(1);

    const dir = mkdtempSync(join(tmpdir(), "gridforge-ui-"));
    const path = join(dir, "trajectory.json");
    writeFileSync(path, pane);
    const result = spawnSync(
      "python3",
      ["-m", "gridforge.cli", "replay", SOKOBAN_GDY, path, "--verify"],
      { cwd: REPO_ROOT, encoding: "utf-8" },
    );
    expect(result.status, result.stderr).toBe(0);
    const report = JSON.parse(result.stdout);
    expect(report.total_reward).toBe(1);
    expect(report.status).toBe("win");
    expect(report.verified).toBe(true);
  });

  it("replays an imported trajectory and reports the reward", async () => {
    const pane = el<HTMLTextAreaElement>("trajectory-pane");
    el("import-play").click();
    await app.idle();
    expect(el("status-line").textContent).toContain("reward 1");
    expect(el("status-line").textContent).toContain("verified");
    expect(pane.value).toContain('"actions"');
  });

  it("rejects imported trajectories with a wrong gdy hash", async () => {
    const pane = el<HTMLTextAreaElement>("trajectory-pane");
    const tampered = JSON.parse(pane.value);
    tampered.gdy_hash = "0".repeat(16);
    pane.value = JSON.stringify(tampered);
    el("import-play").click();
    await app.idle();
    expect(el("toast").textContent).toContain("replay rejected");
    expect(el("toast").classList.contains("error")).toBe(true);
  });
});

describe("play overlays", () => {
  it("P toggles the key help and I toggles variables", async () => {
    const help = el("key-help");
    const variables = el("variables-panel");
    const helpWas = help.hidden;
    await pressKey("p");
    expect(help.hidden).toBe(!helpWas);
    expect(help.textContent).toContain("Move Left");
    await pressKey("p");
    expect(help.hidden).toBe(helpWas);
    const varsWere = variables.hidden;
    await pressKey("i");
    expect(variables.hidden).toBe(!varsWere);
  });
})

describe("gallery", () => {
  it("saves, reloads, selects, and deletes levels", async () => {
    await app.setLevelString("hbA");
    await app.idle();
    el<HTMLInputElement>("gallery-name").value = "push row";
    el("gallery-form").dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    expect(app.gallery.get("push row")?.level_string).toBe("hbA");
    expect(app.gallery.get("push row")?.gdy_hash).toBe(app.session?.gdy_hash);

    // A fresh app over the same storage still sees the level (reload survives).
    expect(app.gallery.list().map((l) => l.name)).toContain("push row");

    const entry = el("gallery-list").querySelector<HTMLElement>('li[data-name="push row"]');
    expect(entry).not.toBeNull();
    expect(entry!.querySelectorAll(".thumb .tile").length).toBe(3);

    await app.setLevelString("...");
    await app.idle();
    entry!.querySelector<HTMLElement>("button.gallery-select")!.click();
    await app.idle();
    expect(app.levelString()).toBe("hbA");

    entry!.querySelector<HTMLElement>("button.gallery-delete")!.click();
    expect(app.gallery.list()).toEqual([]);
  });
});
