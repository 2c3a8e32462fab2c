// Runtime validators for serve protocol responses.  The client runs every
// response through these, so a drifting server fails loudly instead of
// rendering garbage; the integration suite reuses them as its conformance
// oracle.

import type {
  ReplayReport,
  SessionResponse,
  StateView,
  StepResponse,
  Trajectory,
  ValidateResponse,
  Layout,
} from "./types.js";

class SchemaViolation extends Error {
  constructor(path: string, message: string) {
    super(`protocol schema violation at ${path}: ${message}`);
  }
}

function isObject(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function need(condition: boolean, path: string, message: string): asserts condition {
  if (!condition) throw new SchemaViolation(path, message);
}

function needString(value: unknown, path: string): string {
  need(typeof value === "string", path, `expected string, got ${typeof value}`);
  return value as string;
}

function needNumber(value: unknown, path: string): number {
  need(typeof value === "number" && Number.isFinite(value as number), path, "expected number");
  return value as number;
}

function needBoolean(value: unknown, path: string): boolean {
  need(typeof value === "boolean", path, `expected boolean, got ${typeof value}`);
  return value as boolean;
}

function needArray(value: unknown, path: string): unknown[] {
  need(Array.isArray(value), path, "expected array");
  return value as unknown[];
}

export function validateDiagnostics(value: unknown, path = "diagnostics"): void {
  for (const [i, item] of needArray(value, path).entries()) {
    need(isObject(item), `${path}[${i}]`, "expected object");
    needString(item.severity, `${path}[${i}].severity`);
    needString(item.code, `${path}[${i}].code`);
    needString(item.path, `${path}[${i}].path`);
    needString(item.message, `${path}[${i}].message`);
  }
}

export function validateValidateResponse(value: unknown): ValidateResponse {
  need(isObject(value), "$", "expected object");
  needBoolean(value.valid, "valid");
  validateDiagnostics(value.diagnostics);
  return value as unknown as ValidateResponse;
}

export function validateSessionResponse(value: unknown): SessionResponse {
  need(isObject(value), "$", "expected object");
  needString(value.session_id, "session_id");
  needString(value.env_name, "env_name");
  needString(value.gdy_hash, "gdy_hash");
  for (const [i, obj] of needArray(value.objects, "objects").entries()) {
    need(isObject(obj), `objects[${i}]`, "expected object");
    needString(obj.name, `objects[${i}].name`);
    needString(obj.map_char, `objects[${i}].map_char`);
    needString(obj.tile, `objects[${i}].tile`);
    needNumber(obj.z, `objects[${i}].z`);
    needBoolean(obj.autotile, `objects[${i}].autotile`);
  }
  const space = needArray(value.action_space, "action_space");
  need(space.length >= 1, "action_space", "must contain at least the no-op");
  for (const [i, entry] of space.entries()) {
    need(isObject(entry), `action_space[${i}]`, "expected object");
    need(needNumber(entry.id, `action_space[${i}].id`) === i, `action_space[${i}].id`, "ids must be contiguous");
    needString(entry.action, `action_space[${i}].action`);
    needString(entry.input, `action_space[${i}].input`);
    needString(entry.label, `action_space[${i}].label`);
    need(entry.key === null || typeof entry.key === "string", `action_space[${i}].key`, "expected string or null");
  }
  for (const [i, level] of needArray(value.levels, "levels").entries()) {
    need(isObject(level), `levels[${i}]`, "expected object");
    needNumber(level.index, `levels[${i}].index`);
    needString(level.level_string, `levels[${i}].level_string`);
  }
  return value as unknown as SessionResponse;
}

function validateRender(value: unknown, path: string): void {
  need(isObject(value), path, "expected object");
  const width = needNumber(value.width, `${path}.width`);
  const height = needNumber(value.height, `${path}.height`);
  const rows = needArray(value.cells, `${path}.cells`);
  need(rows.length === height, `${path}.cells`, `expected ${height} rows`);
  for (const [y, row] of rows.entries()) {
    const cols = needArray(row, `${path}.cells[${y}]`);
    need(cols.length === width, `${path}.cells[${y}]`, `expected ${width} cells`);
    for (const [x, cell] of cols.entries()) {
      for (const [i, tile] of needArray(cell, `${path}.cells[${y}][${x}]`).entries()) {
        const tpath = `${path}.cells[${y}][${x}][${i}]`;
        need(isObject(tile), tpath, "expected object");
        needString(tile.object, `${tpath}.object`);
        needString(tile.tile, `${tpath}.tile`);
        needString(tile.orientation, `${tpath}.orientation`);
        need(
          tile.autotile === null || typeof tile.autotile === "number",
          `${tpath}.autotile`,
          "expected number or null",
        );
      }
    }
  }
}

export function validateStateView(value: unknown): StateView {
  need(isObject(value), "$", "expected object");
  validateRender(value.render, "render");
  need(isObject(value.variables), "variables", "expected object");
  for (const [name, v] of Object.entries(value.variables as object)) {
    needNumber(v, `variables.${name}`);
  }
  for (const [i, bit] of needArray(value.mask, "mask").entries()) {
    needBoolean(bit, `mask[${i}]`);
  }
  needString(value.status, "status");
  needNumber(value.step, "step");
  return value as unknown as StateView;
}

export function validateStepResponse(value: unknown): StepResponse {
  const view = validateStateView(value) as unknown as Record<string, unknown>;
  needNumber(view.reward, "reward");
  needBoolean(view.terminated, "terminated");
  needBoolean(view.truncated, "truncated");
  for (const [i, event] of needArray(view.events, "events").entries()) {
    need(isObject(event), `events[${i}]`, "expected object");
    needString(event.command, `events[${i}].command`);
    needString(event.object, `events[${i}].object`);
    needNumber(event.x, `events[${i}].x`);
    needNumber(event.y, `events[${i}].y`);
  }
  return view as unknown as StepResponse;
}

export function validateLayout(value: unknown): Layout {
  need(isObject(value), "layout", "expected object");
  needNumber(value.width, "layout.width");
  needNumber(value.height, "layout.height");
  for (const [i, p] of needArray(value.placements, "layout.placements").entries()) {
    need(isObject(p), `layout.placements[${i}]`, "expected object");
    needNumber(p.x, `layout.placements[${i}].x`);
    needNumber(p.y, `layout.placements[${i}].y`);
    needString(p.object, `layout.placements[${i}].object`);
  }
  return value as unknown as Layout;
}

export function validateTrajectory(value: unknown): Trajectory {
  need(isObject(value), "trajectory", "expected object");
  need(value.version === 1, "trajectory.version", "unsupported version");
  needString(value.gdy_hash, "trajectory.gdy_hash");
  needNumber(value.seed, "trajectory.seed");
  for (const [i, a] of needArray(value.actions, "trajectory.actions").entries()) {
    needNumber(a, `trajectory.actions[${i}]`);
  }
  need(isObject(value.level), "trajectory.level", "expected object");
  const keys = Object.keys(value.level as object);
  need(keys.length === 1, "trajectory.level", "exactly one of index, string, generator");
  need(
    ["index", "string", "generator"].includes(keys[0]),
    "trajectory.level",
    `unknown level ref ${keys[0]}`,
  );
  return value as unknown as Trajectory;
}

export function validateReplayReport(value: unknown): ReplayReport {
  need(isObject(value), "report", "expected object");
  needNumber(value.total_reward, "report.total_reward");
  needString(value.status, "report.status");
  needString(value.final_hash, "report.final_hash");
  needBoolean(value.verified, "report.verified");
  return value as unknown as ReplayReport;
}
