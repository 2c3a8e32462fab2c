// Protocol conformance against a live `gridforge serve` instance.  Every
// client call funnels through the schema validators, so each assertion here
// is also a schema check on the wire format.

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, GridforgeClient } from "../src/api.js";
import { assetText, startServer, type LiveServer } from "./server.js";

let server: LiveServer;
let client: GridforgeClient;

beforeAll(async () => {
  server = await startServer();
  client = new GridforgeClient(server.baseUrl);
});

afterAll(() => server?.stop());

describe("validate endpoint", () => {
  it("accepts the bundled sokoban", async () => {
    const result = await client.validateGdy(assetText("sokoban"));
    expect(result).toEqual({ valid: true, diagnostics: [] });
  });

  it("reports diagnostics for bad documents", async () => {
    const result = await client.validateGdy("Environment: {}");
    expect(result.valid).toBe(false);
    expect(result.diagnostics.length).toBeGreaterThan(0);
  });
});

describe("session lifecycle", () => {
  it("creates sokoban sessions with the documented action table", async () => {
    const session = await client.createSession(assetText("sokoban"));
    expect(session.env_name).toBe("sokoban");
    expect(session.objects.map((o) => o.name)).toEqual(["box", "wall", "hole", "avatar"]);
    expect(session.action_space.map((e) => e.key)).toEqual([null, "A", "D", "S", "W"]);
    expect(session.action_space.map((e) => e.label)).toEqual([
      "No-Op",
      "Move Left",
      "Move Right",
      "Move Down",
      "Move Up",
    ]);
    expect(session.levels).toHaveLength(2);
    await client.deleteSession(session.session_id);
  });

  it("rejects invalid GDY with 400", async () => {
    await expect(client.createSession("a: [")).rejects.toMatchObject({ status: 400 });
  });

  it("404s unknown sessions", async () => {
    await expect(client.step("snope", 0)).rejects.toMatchObject({ status: 404 });
  });
});

describe("reset, step, mask", () => {
  it("drives a full sokoban episode", async () => {
    const session = await client.createSession(assetText("sokoban"));
    const sid = session.session_id;

    const view = await client.reset(sid, { index: 0 }, 1);
    expect(view.step).toBe(0);
    expect(view.status).toBe("running");
    expect(view.render.width).toBe(7);
    expect(view.mask[0]).toBe(true);

    // Move up into the wall: nothing changes but the step counter.
    const bump = await client.step(sid, 4);
    expect(bump.reward).toBe(0);
    expect(bump.render).toEqual(view.render);
    expect(bump.events).toEqual([]);
    expect(bump.step).toBe(1);

    await client.deleteSession(sid);
  });

  it("steps after a win are 409", async () => {
    const session = await client.createSession(assetText("sokoban"));
    const sid = session.session_id;
    await client.reset(sid, { string: "hbA" }, 7);
    const step = await client.step(sid, 1);
    expect(step.reward).toBe(1);
    expect(step.terminated).toBe(true);
    expect(step.status).toBe("win");
    await expect(client.step(sid, 0)).rejects.toMatchObject({ status: 409 });
    await client.deleteSession(sid);
  });

  it("resets from generator refs", async () => {
    const session = await client.createSession(assetText("escape_room"));
    const view = await client.reset(
      session.session_id,
      { generator: { seed: 3, width: 12, height: 10 } },
      3,
    );
    expect(view.render.width).toBe(12);
    expect(view.render.height).toBe(10);
    await client.deleteSession(session.session_id);
  });
});

describe("level endpoints", () => {
  it("parse and serialize round trip", async () => {
    const session = await client.createSession(assetText("sokoban"));
    const layout = await client.parseLevel(session.session_id, "hbA");
    expect(layout).toEqual({
      width: 3,
      height: 1,
      placements: [
        { x: 0, y: 0, object: "hole" },
        { x: 1, y: 0, object: "box" },
        { x: 2, y: 0, object: "avatar" },
      ],
    });
    expect(await client.serializeLevel(session.session_id, layout)).toBe("hbA");
    await client.deleteSession(session.session_id);
  });
});

describe("record and replay", () => {
  it("records a push episode and verifies it via the replay endpoint", async () => {
    const session = await client.createSession(assetText("sokoban"));
    const sid = session.session_id;
    await client.reset(sid, { string: "hbA" }, 7);
    const fresh = await client.recordStart(sid);
    expect(fresh.step).toBe(0);
    await client.step(sid, 1);
    const trajectory = await client.recordStop(sid);
    expect(trajectory.actions).toEqual([1]);
    expect(trajectory.total_reward).toBe(1);
    expect(trajectory.gdy_hash).toBe(session.gdy_hash);

    const report = await client.replay(sid, trajectory);
    expect(report.verified).toBe(true);
    expect(report.total_reward).toBe(1);
    expect(report.status).toBe("win");
    await client.deleteSession(sid);
  });

  it("rejects trajectories bound to a different document", async () => {
    const session = await client.createSession(assetText("escape_room"));
    const foreign = {
      version: 1,
      gdy_hash: "0".repeat(16),
      level: { string: "hbA" },
      seed: 7,
      actions: [1],
    };
    let caught: unknown;
    try {
      await client.replay(session.session_id, foreign);
    } catch (error) {
      caught = error;
    }
    expect(caught).toBeInstanceOf(ApiError);
    expect((caught as ApiError).status).toBe(409);
    await client.deleteSession(session.session_id);
  });
});
