/**
 * Shared wire types: the canonical program JSON, trace rows streamed from
 * the service, and scene snapshots. These mirror the engine's JSON
 * contracts byte-for-byte.
 */

export type BlockKind =
  | "forward"
  | "turn"
  | "start_trail"
  | "stop_trail"
  | "start_wear"
  | "stop_wear"
  | "start_animation"
  | "repeat"
  | "forever"
  | "if_cond";

export type ConditionKind = "touches_object" | "touches_zone";

export interface ConditionJson {
  kind: ConditionKind;
  target: string;
}

export interface BlockJson {
  kind: BlockKind;
  steps?: number;
  degrees?: number;
  accessory?: string;
  clip?: string;
  count?: number;
  condition?: ConditionJson;
  children?: BlockJson[];
}

export interface ScriptJson {
  event: "when_touched";
  body: BlockJson[];
}

export interface ProgramJson {
  version: 1;
  metadata: Record<string, string>;
  scripts: ScriptJson[];
}

export interface Diagnostic {
  severity: "error" | "warning";
  line: number;
  col: number;
  code: string;
  message: string;
}

export interface ValidationReport {
  ok: boolean;
  diagnostics: Diagnostic[];
}

/** One streamed trace effect; `kind` discriminates the payload. */
export interface TraceEffect {
  kind: string;
  script?: number;
  steps?: number;
  degrees?: number;
  position?: [number, number, number];
  yaw_mdeg?: number;
  accessory?: string;
  clip?: string;
  changed?: boolean;
  condition?: ConditionKind;
  target?: string;
  target_kind?: "object" | "zone";
  status?: string;
  value?: boolean;
  event?: string;
  applied?: boolean;
}

export interface TraceRow {
  tick: number;
  effects: TraceEffect[];
  scene_hash: string;
}

export interface DetectionSnapshot {
  bbox: [number, number, number, number] | null;
  confidence: number;
  status: "searching" | "found" | "touched";
}

export interface SceneSnapshot {
  character: {
    position: [number, number, number];
    yaw_mdeg: number;
    half_extents: [number, number, number];
  };
  worn: string[];
  trail_active: boolean;
  trail: [number, number, number][];
  active_animation: string | null;
  tick: number;
  perception: {
    last_refresh_tick: number;
    detections: Record<string, DetectionSnapshot>;
    zone_touches: Record<string, boolean>;
  };
}

export interface SessionState {
  id: string;
  program_id: string;
  scene_id: string;
  status: "idle" | "running" | "stopped" | "finished";
  tick: number;
  mode: "paused" | "stepping" | "realtime";
  realtime_rate: number;
  scene: SceneSnapshot;
  scene_hash: string;
}

export interface ModerationVerdictJson {
  inappropriateForChildren: boolean;
  reason: string;
}

export interface GenerationJobJson {
  id: string;
  kind: "character" | "accessory";
  user_text: string;
  prompt: string;
  status: "pending" | "succeeded" | "failed";
  asset_uri: string | null;
  asset_id: string | null;
  created_at: string;
  error: string | null;
}

export interface AssetRecordJson {
  id: string;
  kind: "character" | "accessory" | "clip";
  display_name: string;
  origin_prompt: string;
  file_path: string;
  created_at: string;
}

export interface SceneZoneJson {
  label: string;
  plane: string;
  center: [number, number, number];
  half_extents: [number, number];
  height: number;
}

export interface SceneJson {
  planes: {
    id: string;
    origin: [number, number, number];
    normal: [number, number, number];
    extents: [number, number];
  }[];
  objects: {
    class: string;
    position: [number, number, number];
    yaw_deg: number;
    half_extents: [number, number, number];
  }[];
  zones: SceneZoneJson[];
  camera?: unknown;
  spawn: { position: [number, number, number]; yaw_deg: number };
}
