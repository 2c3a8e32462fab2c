// The IDE shell: GDY editing, tile-painting level editor with live level-
// string sync, keyboard play, variable inspector, trajectory record and
// replay, and a local-storage level gallery.
//
// All game logic is server-side; this class only exchanges protocol
// messages (one serialized request at a time) and renders the results.

import { ApiError, GridforgeClient } from "./api.js";
import { Gallery } from "./gallery.js";
import { EditorGrid } from "./grid.js";
import { actionForKey, buildKeyMap } from "./keyboard.js";
import { renderBoard, renderMapFromLevelString } from "./render.js";
import { validateTrajectory } from "./schema.js";
import type {
  Layout,
  Mode,
  SessionResponse,
  StateView,
  StepResponse,
  Trajectory,
} from "./types.js";

export interface AppOptions {
  storage?: Storage;
  seed?: number;
  replayDelayMs?: number;
}

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class GridforgeApp {
  readonly els: Record<string, HTMLElement>;
  readonly gallery: Gallery;
  grid = new EditorGrid(3, 3);
  mode: Mode = "edit";
  session: SessionResponse | null = null;
  brush: string | null = null;
  view: StateView | null = null;
  recording = false;
  lastTrajectory: Trajectory | null = null;
  seed: number;
  private replayDelayMs: number;
  private charToObject = new Map<string, string>();
  private objectToChar = new Map<string, string>();
  private keyMap = new Map<string, number>();
  private queue: Promise<unknown> = Promise.resolve();

  constructor(
    readonly root: HTMLElement,
    readonly client: GridforgeClient,
    options: AppOptions = {},
  ) {
    this.gallery = new Gallery(options.storage ?? window.localStorage);
    this.seed = options.seed ?? Math.floor(Math.random() * 2 ** 31);
    this.replayDelayMs = options.replayDelayMs ?? 60;
    this.els = this.buildDom();
    this.bindEvents();
    this.renderGallery();
  }

  /** Serialize protocol work: one in-flight request chain per session. */
  private enqueue<T>(task: () => Promise<T>): Promise<T> {
    const next = this.queue.then(task, task);
    this.queue = next.catch(() => undefined);
    return next;
  }

  /** Resolves once all queued protocol work has settled (test hook). */
  async idle(): Promise<void> {
    let tail;
    do {
      tail = this.queue;
      await tail.catch(() => undefined);
    } while (tail !== this.queue);
  }

  // -- DOM ------------------------------------------------------------

  private buildDom(): Record<string, HTMLElement> {
    const doc = this.root.ownerDocument;
    this.root.innerHTML = `
      <div class="app">
        <header>
          <strong id="env-name">no environment</strong>
          <button id="mode-edit" class="active">Edit</button>
          <button id="mode-play">Play</button>
          <button id="record-btn" disabled>&#9210; Record</button>
          <button id="replay-btn" disabled>&#9205; Replay</button>
          <span id="status-line"></span>
        </header>
        <main>
          <aside class="panel">
            <h3>Objects</h3>
            <div id="palette"></div>
            <h3>Bundled levels</h3>
            <ul id="level-list"></ul>
            <h3>Gallery</h3>
            <form id="gallery-form">
              <input id="gallery-name" placeholder="level name" />
              <button id="gallery-save" type="submit">Save</button>
            </form>
            <ul id="gallery-list"></ul>
          </aside>
          <section class="board-wrap">
            <div id="banner" hidden></div>
            <div id="board" tabindex="0"></div>
            <div id="variables-panel" hidden></div>
            <div id="key-help" hidden></div>
          </section>
          <aside class="panel">
            <h3>GDY</h3>
            <textarea id="gdy-text" rows="12" spellcheck="false"></textarea>
            <button id="apply-gdy">Apply GDY</button>
            <div id="diagnostics"></div>
            <h3>Level string</h3>
            <textarea id="level-string" rows="6" spellcheck="false"></textarea>
            <h3>Trajectory</h3>
            <textarea id="trajectory-pane" rows="6" spellcheck="false"></textarea>
            <button id="import-play">Import &amp; replay</button>
            <div id="toast"></div>
          </aside>
        </main>
      </div>`;
    const ids = [
      "env-name", "mode-edit", "mode-play", "record-btn", "replay-btn", "status-line",
      "palette", "level-list", "gallery-form", "gallery-name", "gallery-save", "gallery-list",
      "banner", "board", "variables-panel", "key-help",
      "gdy-text", "apply-gdy", "diagnostics", "level-string", "trajectory-pane", "import-play",
      "toast",
    ];
    const els: Record<string, HTMLElement> = {};
    for (const id of ids) {
      const el = doc.getElementById(id);
      if (!el) throw new Error(`missing element ${id}`);
      els[id] = el;
    }
    return els;
  }

  private bindEvents(): void {
    this.els["apply-gdy"].addEventListener("click", () => {
      void this.applyGdy(this.gdyText());
    });
    this.els["mode-edit"].addEventListener("click", () => void this.enterEdit());
    this.els["mode-play"].addEventListener("click", () => void this.enterPlay());
    this.els["record-btn"].addEventListener("click", () => void this.toggleRecord());
    this.els["replay-btn"].addEventListener("click", () => void this.replayFromPane());
    this.els["import-play"].addEventListener("click", () => void this.replayFromPane());
    this.els["level-string"].addEventListener("change", () => {
      void this.setLevelString(this.levelString());
    });
    this.els["gallery-form"].addEventListener("submit", (event) => {
      event.preventDefault();
      this.saveGalleryLevel();
    });
    this.els["board"].addEventListener("click", (event) => {
      const cell = (event.target as HTMLElement).closest<HTMLElement>(".board-cell");
      if (cell && this.mode === "edit") {
        this.paintAt(Number(cell.dataset.x), Number(cell.dataset.y));
      }
    });
    this.root.ownerDocument.addEventListener("keydown", (event) => {
      void this.onKeyDown(event as KeyboardEvent);
    });
  }

  // -- helpers ----------------------------------------------------------

  gdyText(): string {
    return (this.els["gdy-text"] as HTMLTextAreaElement).value;
  }

  levelString(): string {
    return (this.els["level-string"] as HTMLTextAreaElement).value;
  }

  private setPane(id: string, text: string): void {
    (this.els[id] as HTMLTextAreaElement).value = text;
  }

  toast(message: string, isError = false): void {
    this.els["toast"].textContent = message;
    this.els["toast"].classList.toggle("error", isError);
  }

  private status(text: string): void {
    this.els["status-line"].textContent = text;
  }

  private requireSession(): SessionResponse {
    if (!this.session) throw new Error("apply a GDY document first");
    return this.session;
  }

  // -- GDY and session ----------------------------------------------------

  async applyGdy(text: string): Promise<void> {
    this.setPane("gdy-text", text);
    await this.enqueue(async () => {
      const validation = await this.client.validateGdy(text);
      this.els["diagnostics"].textContent = validation.valid
        ? "valid"
        : validation.diagnostics.map((d) => `${d.code} at ${d.path}: ${d.message}`).join("\n");
      if (!validation.valid) {
        this.toast("GDY has errors", true);
        return;
      }
      if (this.session) {
        await this.client.deleteSession(this.session.session_id).catch(() => undefined);
      }
      this.session = await this.client.createSession(text);
      this.charToObject = new Map(this.session.objects.map((o) => [o.map_char, o.name]));
      this.objectToChar = new Map(this.session.objects.map((o) => [o.name, o.map_char]));
      this.keyMap = buildKeyMap(this.session.action_space);
      this.recording = false;
      this.els["env-name"].textContent = this.session.env_name;
      (this.els["record-btn"] as HTMLButtonElement).disabled = false;
      this.renderPalette();
      this.renderLevelList();
      this.renderKeyHelp();
      this.renderGallery();
      if (this.session.levels.length) {
        this.loadLevelString(this.session.levels[0].level_string);
      } else {
        this.grid = new EditorGrid(3, 3);
        this.syncFromGrid();
      }
      await this.enterEditNow();
      this.toast(`session ${this.session.session_id} ready`);
    });
  }

  private renderPalette(): void {
    const doc = this.root.ownerDocument;
    const palette = this.els["palette"];
    palette.textContent = "";
    const session = this.requireSession();
    const brushes: (string | null)[] = [null, ...session.objects.map((o) => o.name)];
    for (const name of brushes) {
      const button = doc.createElement("button");
      button.className = "brush";
      button.dataset.brush = name ?? "";
      button.textContent = name ?? "erase";
      if (name === this.brush) button.classList.add("active");
      button.addEventListener("click", () => {
        this.brush = name;
        this.renderPalette();
      });
      palette.appendChild(button);
    }
  }

  private renderLevelList(): void {
    const doc = this.root.ownerDocument;
    const list = this.els["level-list"];
    list.textContent = "";
    for (const level of this.requireSession().levels) {
      const item = doc.createElement("li");
      const button = doc.createElement("button");
      button.textContent = `level ${level.index}`;
      button.addEventListener("click", () => {
        this.loadLevelString(level.level_string);
        void this.enterEdit();
      });
      item.appendChild(button);
      list.appendChild(item);
    }
  }

  private renderKeyHelp(): void {
    const lines = this.requireSession().action_space.map(
      (entry) => `${entry.key ?? "-"}  ${entry.label}`,
    );
    this.els["key-help"].textContent =
      lines.join("\n") + "\nP  toggle this help\nI  toggle variables";
  }

  // -- editor -----------------------------------------------------------

  private loadLevelString(text: string): void {
    this.grid = EditorGrid.fromLevelString(text, this.charToObject);
    this.syncFromGrid();
  }

  /** Paint with the selected brush; keeps the string pane in sync. */
  paintAt(x: number, y: number): void {
    if (!this.session) return;
    this.grid.paint(x, y, this.brush);
    this.syncFromGrid();
  }

  private syncFromGrid(): void {
    this.setPane("level-string", this.grid.toLevelString(this.objectToChar));
    if (this.mode === "edit") this.renderEditBoard();
  }

  private renderEditBoard(): void {
    if (!this.session) return;
    // Render the full canvas (including the growth margin) so every cell
    // is clickable; empty canvas cells render as blanks.
    const canvas: string[] = [];
    for (let y = 0; y < this.grid.height; y++) {
      let line = "";
      for (let x = 0; x < this.grid.width; x++) {
        const object = this.grid.objectAt(x, y);
        line += object === null ? "." : this.objectToChar.get(object) ?? "?";
      }
      canvas.push(line);
    }
    const render = renderMapFromLevelString(canvas.join("\n"), this.session.objects);
    renderBoard(this.els["board"], render);
    this.els["board"].classList.add("editing");
  }

  /** The string pane is editable; the server's parse is authoritative. */
  async setLevelString(text: string): Promise<void> {
    const session = this.requireSession();
    await this.enqueue(async () => {
      try {
        const layout = await this.client.parseLevel(session.session_id, text);
        this.grid = this.gridFromLayout(layout);
        this.syncFromGrid();
        this.toast("level parsed");
      } catch (error) {
        this.toast(`level string rejected: ${(error as Error).message}`, true);
      }
    });
  }

  private gridFromLayout(layout: Layout): EditorGrid {
    const grid = new EditorGrid(layout.width, layout.height);
    for (const placement of layout.placements) {
      grid.paint(placement.x, placement.y, placement.object);
    }
    return grid;
  }

  // -- play -------------------------------------------------------------

  async enterEdit(): Promise<void> {
    await this.enqueue(async () => this.enterEditNow());
  }

  private enterEditNow(): void {
    this.mode = "edit";
    this.view = null;
    this.els["mode-edit"].classList.add("active");
    this.els["mode-play"].classList.remove("active");
    this.els["banner"].hidden = true;
    this.status("");
    this.renderEditBoard();
  }

  async enterPlay(): Promise<void> {
    const session = this.requireSession();
    const level = this.levelString();
    await this.enqueue(async () => {
      try {
        const view = await this.client.reset(session.session_id, { string: level }, this.seed);
        this.mode = "play";
        this.recording = false;
        this.applyView(view);
        this.els["mode-play"].classList.add("active");
        this.els["mode-edit"].classList.remove("active");
        this.els["banner"].hidden = true;
        this.status(`playing (seed ${this.seed})`);
      } catch (error) {
        this.toast(`cannot play: ${(error as Error).message}`, true);
      }
    });
  }

  private applyView(view: StateView): void {
    this.view = view;
    renderBoard(this.els["board"], view.render);
    this.els["board"].classList.remove("editing");
    this.renderVariables(view.variables);
  }

  private renderVariables(variables: Record<string, number>): void {
    const lines = Object.entries(variables)
      .sort(([a], [b]) => a.localeCompare(b))
      .map(([name, value]) => `${name} = ${value}`);
    this.els["variables-panel"].textContent = lines.join("\n") || "(no variables)";
  }

  async onKeyDown(event: KeyboardEvent): Promise<void> {
    const key = event.key;
    if (key === "p" || key === "P") {
      this.els["key-help"].hidden = !this.els["key-help"].hidden;
      return;
    }
    if (key === "i" || key === "I") {
      this.els["variables-panel"].hidden = !this.els["variables-panel"].hidden;
      return;
    }
    if (this.mode !== "play" || !this.session) return;
    const actionId = actionForKey(this.keyMap, key);
    if (actionId === null) return;
    event.preventDefault?.();
    await this.stepAction(actionId);
  }

  async stepAction(actionId: number): Promise<StepResponse | null> {
    const session = this.requireSession();
    return this.enqueue(async () => {
      if (!this.view || this.view.status !== "running") return null;
      const result = await this.client.step(session.session_id, actionId);
      this.applyView(result);
      if (result.reward) this.status(`reward ${result.reward}`);
      if (result.terminated || result.truncated) {
        await this.onEpisodeEnd(result);
      }
      return result;
    });
  }

  private async onEpisodeEnd(result: StepResponse): Promise<void> {
    const banner = this.els["banner"];
    banner.hidden = false;
    banner.textContent =
      result.status === "win"
        ? `You win! (+${result.reward})`
        : result.status === "lose"
          ? "You lose."
          : "Out of time.";
    if (this.recording) {
      const session = this.requireSession();
      const trajectory = await this.client.recordStop(session.session_id);
      this.recording = false;
      this.finishRecording(trajectory);
      // The episode resets so the replay button can run on a fresh board.
      const view = await this.client.reset(
        session.session_id, { string: this.levelString() }, this.seed,
      );
      this.applyView(view);
    }
  }

  // -- record & replay ----------------------------------------------------

  async toggleRecord(): Promise<void> {
    const session = this.requireSession();
    await this.enqueue(async () => {
      if (!this.recording) {
        if (this.mode !== "play") {
          const view = await this.client.reset(
            session.session_id, { string: this.levelString() }, this.seed,
          );
          this.mode = "play";
          this.applyView(view);
        }
        const view = await this.client.recordStart(session.session_id);
        this.recording = true;
        this.applyView(view);
        this.els["record-btn"].classList.add("recording");
        this.els["banner"].hidden = true;
        this.status("recording");
      } else {
        const trajectory = await this.client.recordStop(session.session_id);
        this.recording = false;
        this.finishRecording(trajectory);
      }
    });
  }

  private finishRecording(trajectory: Trajectory): void {
    this.lastTrajectory = trajectory;
    this.setPane("trajectory-pane", JSON.stringify(trajectory, null, 2));
    this.els["record-btn"].classList.remove("recording");
    (this.els["replay-btn"] as HTMLButtonElement).disabled = false;
    this.status(`recorded ${trajectory.actions.length} actions`);
  }

  /** Trajectories can be pasted in from external sources and replayed. */
  async replayFromPane(): Promise<void> {
    const session = this.requireSession();
    let trajectory: Trajectory;
    try {
      trajectory = validateTrajectory(JSON.parse(this.levelPaneTrajectory()));
    } catch (error) {
      this.toast(`bad trajectory: ${(error as Error).message}`, true);
      return;
    }
    await this.enqueue(async () => {
      let report;
      try {
        report = await this.client.replay(session.session_id, trajectory);
      } catch (error) {
        const reason = error instanceof ApiError ? error.message : String(error);
        this.toast(`replay rejected: ${reason}`, true);
        return;
      }
      this.mode = "replay";
      this.els["banner"].hidden = true;
      const view = await this.client.reset(session.session_id, trajectory.level, trajectory.seed);
      this.applyView(view);
      let total = 0;
      for (const action of trajectory.actions) {
        if (this.replayDelayMs) await sleep(this.replayDelayMs);
        const result = await this.client.step(session.session_id, action);
        total += result.reward;
        this.applyView(result);
      }
      this.mode = "play";
      this.status(
        `replay finished: reward ${total}, ${report.verified ? "verified" : "NOT VERIFIED"}`,
      );
      const banner = this.els["banner"];
      banner.hidden = false;
      banner.textContent = `Replay reward ${total} (${report.status})`;
    });
  }

  private levelPaneTrajectory(): string {
    return (this.els["trajectory-pane"] as HTMLTextAreaElement).value;
  }

  // -- gallery ------------------------------------------------------------

  saveGalleryLevel(): void {
    const session = this.requireSession();
    const name = (this.els["gallery-name"] as HTMLInputElement).value.trim();
    if (!name) {
      this.toast("name the level first", true);
      return;
    }
    this.gallery.save({
      name,
      level_string: this.levelString(),
      gdy_hash: session.gdy_hash,
    });
    this.renderGallery();
    this.toast(`saved '${name}'`);
  }

  deleteGalleryLevel(name: string): void {
    this.gallery.remove(name);
    this.renderGallery();
  }

  renderGallery(): void {
    const doc = this.root.ownerDocument;
    const list = this.els["gallery-list"];
    list.textContent = "";
    for (const level of this.gallery.list()) {
      const item = doc.createElement("li");
      item.dataset.name = level.name;
      const thumb = doc.createElement("div");
      thumb.className = "thumb";
      if (this.session) {
        renderBoard(thumb, renderMapFromLevelString(level.level_string, this.session.objects));
      }
      const select = doc.createElement("button");
      select.className = "gallery-select";
      select.textContent = level.name;
      select.addEventListener("click", () => {
        this.loadLevelString(level.level_string);
        void this.enterEdit();
      });
      const remove = doc.createElement("button");
      remove.className = "gallery-delete";
      remove.textContent = "x";
      remove.addEventListener("click", () => this.deleteGalleryLevel(level.name));
      item.append(thumb, select, remove);
      list.appendChild(item);
    }
  }
}
