// HTTP client for the gridforge serve protocol.  Every piece of game logic
// lives server-side; the UI only ever exchanges these messages.

import {
  validateLayout,
  validateReplayReport,
  validateSessionResponse,
  validateStateView,
  validateStepResponse,
  validateTrajectory,
  validateValidateResponse,
} from "./schema.js";
import type {
  Layout,
  LevelRef,
  ReplayReport,
  SessionResponse,
  StateView,
  StepResponse,
  Trajectory,
  ValidateResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public details: unknown = undefined,
  ) {
    super(message);
  }
}

export class GridforgeClient {
  constructor(private baseUrl: string = "") {}

  private async post(path: string, body: unknown): Promise<unknown> {
    const response = await fetch(`${this.baseUrl}/api/v1${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const data = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail = (data as { error?: string }).error ?? response.statusText;
      throw new ApiError(response.status, detail, (data as { details?: unknown }).details);
    }
    return data;
  }

  async validateGdy(gdyText: string): Promise<ValidateResponse> {
    return validateValidateResponse(await this.post("/validate", { gdy_text: gdyText }));
  }

  async createSession(gdyText: string): Promise<SessionResponse> {
    return validateSessionResponse(await this.post("/session", { gdy_text: gdyText }));
  }

  async reset(sessionId: string, level: LevelRef, seed: number): Promise<StateView> {
    return validateStateView(await this.post(`/session/${sessionId}/reset`, { level, seed }));
  }

  async step(sessionId: string, actionId: number): Promise<StepResponse> {
    return validateStepResponse(await this.post(`/session/${sessionId}/step`, { action_id: actionId }));
  }

  async parseLevel(sessionId: string, levelString: string): Promise<Layout> {
    const data = await this.post(`/session/${sessionId}/parse_level`, { level_string: levelString });
    return validateLayout((data as { layout?: unknown }).layout);
  }

  async serializeLevel(sessionId: string, layout: Layout): Promise<string> {
    const data = await this.post(`/session/${sessionId}/serialize_level`, { layout });
    const text = (data as { level_string?: unknown }).level_string;
    if (typeof text !== "string") throw new ApiError(200, "serialize_level returned no string");
    return text;
  }

  async recordStart(sessionId: string): Promise<StateView> {
    return validateStateView(await this.post(`/session/${sessionId}/record/start`, {}));
  }

  async recordStop(sessionId: string): Promise<Trajectory> {
    const data = await this.post(`/session/${sessionId}/record/stop`, {});
    return validateTrajectory((data as { trajectory?: unknown }).trajectory);
  }

  async replay(sessionId: string, trajectory: Trajectory): Promise<ReplayReport> {
    const data = await this.post(`/session/${sessionId}/replay`, { trajectory });
    return validateReplayReport((data as { report?: unknown }).report);
  }

  async deleteSession(sessionId: string): Promise<void> {
    const response = await fetch(`${this.baseUrl}/api/v1/session/${sessionId}`, { method: "DELETE" });
    if (!response.ok) throw new ApiError(response.status, "delete failed");
  }
}
