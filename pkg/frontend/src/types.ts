// Message shapes of the gridforge serve protocol (/api/v1).

export interface Diagnostic {
  severity: string;
  code: string;
  path: string;
  message: string;
}

export interface ValidateResponse {
  valid: boolean;
  diagnostics: Diagnostic[];
}

export interface ObjectInfo {
  name: string;
  map_char: string;
  tile: string;
  z: number;
  autotile: boolean;
}

export interface ActionEntry {
  id: number;
  action: string;
  input: string;
  label: string;
  key: string | null;
}

export interface LevelInfo {
  index: number;
  level_string: string;
}

export interface SessionResponse {
  session_id: string;
  env_name: string;
  gdy_hash: string;
  objects: ObjectInfo[];
  action_space: ActionEntry[];
  levels: LevelInfo[];
}

export interface RenderTile {
  object: string;
  tile: string;
  orientation: string;
  autotile: number | null;
}

export interface RenderMap {
  width: number;
  height: number;
  cells: RenderTile[][][]; // [y][x] -> z-ascending tiles
}

export interface StateView {
  render: RenderMap;
  variables: Record<string, number>;
  mask: boolean[];
  status: string;
  step: number;
}

export interface StepEvent {
  command: string;
  object: string;
  x: number;
  y: number;
}

export interface StepResponse extends StateView {
  reward: number;
  terminated: boolean;
  truncated: boolean;
  events: StepEvent[];
}

export type LevelRef =
  | { index: number }
  | { string: string }
  | { generator: { seed: number; width: number; height: number } };

export interface Placement {
  x: number;
  y: number;
  object: string;
}

export interface Layout {
  width: number;
  height: number;
  placements: Placement[];
}

export interface Trajectory {
  version: number;
  gdy_hash: string;
  level: LevelRef;
  seed: number;
  actions: number[];
  final_hash?: string;
  total_reward?: number;
}

export interface ReplayReport {
  total_reward: number;
  status: string;
  final_hash: string;
  verified: boolean;
}

export interface GalleryLevel {
  name: string;
  level_string: string;
  gdy_hash: string;
}

export interface GalleryData {
  version: 1;
  levels: GalleryLevel[];
}

export type Mode = "edit" | "play" | "replay";
