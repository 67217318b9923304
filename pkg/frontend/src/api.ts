/**
 * Typed client over the studio's only data source: the engine service.
 * The fetch implementation is injectable so stores can be tested offline.
 */
import type {
  GenerationJobJson,
  AssetRecordJson,
  ModerationVerdictJson,
  ProgramJson,
  SceneJson,
  SessionState,
  TraceRow,
  ValidationReport,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface ApiErrorBody {
  code: string;
  message: string;
  details?: unknown;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export class StudioApi {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, payload as ApiErrorBody);
    }
    return payload as T;
  }

  // programs
  createProgram(program: ProgramJson): Promise<{ id: string }> {
    return this.request("POST", "/programs", program);
  }

  putProgram(
    id: string,
    program: ProgramJson,
    sceneId?: string,
  ): Promise<{ id: string; report: ValidationReport }> {
    return this.request("PUT", `/programs/${id}`, { program, scene_id: sceneId });
  }

  // scenes and zones
  createScene(scene: SceneJson): Promise<{ id: string; scene: SceneJson }> {
    return this.request("POST", "/scenes", scene);
  }

  getScene(id: string): Promise<{ id: string; scene: SceneJson }> {
    return this.request("GET", `/scenes/${id}`);
  }

  createZone(
    sceneId: string,
    plane: string,
    center: [number, number],
    halfExtents: [number, number],
  ): Promise<{ zone: { label: string }; scene: SceneJson }> {
    return this.request("POST", `/scenes/${sceneId}/zones`, {
      plane,
      center,
      half_extents: halfExtents,
    });
  }

  placeZone(
    sceneId: string,
    label: string,
    center: [number, number, number],
    halfExtents?: [number, number],
  ): Promise<{ scene: SceneJson }> {
    return this.request("PUT", `/scenes/${sceneId}/zones/${label}`, {
      center,
      half_extents: halfExtents,
    });
  }

  // sessions
  createSession(programId: string, sceneId: string): Promise<SessionState> {
    return this.request("POST", "/sessions", { program_id: programId, scene_id: sceneId });
  }

  sessionState(id: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${id}/state`);
  }

  sendEvent(
    id: string,
    type: "touch_character" | "tap_character" | "detection_script_update",
    clientId?: string,
  ): Promise<{ applied: boolean; duplicate: boolean }> {
    return this.request("POST", `/sessions/${id}/events`, { type, client_id: clientId });
  }

  runTicks(id: string, ticks: number): Promise<{ ticks: number; status: string; tick: number }> {
    return this.request("POST", `/sessions/${id}/run`, { ticks });
  }

  setMode(
    id: string,
    mode: "paused" | "stepping" | "realtime",
    rate?: number,
  ): Promise<{ mode: string }> {
    return this.request("POST", `/sessions/${id}/mode`, { mode, rate });
  }

  streamUrl(id: string): string {
    return `${this.baseUrl}/sessions/${id}/stream`;
  }

  // moderation + generation
  moderate(text: string): Promise<{
    verdict: ModerationVerdictJson;
    token?: string;
  }> {
    return this.request("POST", "/moderate", { text });
  }

  generate(
    kind: "character" | "accessory",
    prompt: string,
    moderationToken: string,
  ): Promise<{ job: GenerationJobJson }> {
    return this.request("POST", "/generate", {
      kind,
      prompt,
      moderation_token: moderationToken,
    });
  }

  pollGeneration(jobId: string): Promise<{ job: GenerationJobJson }> {
    return this.request("GET", `/generate/${jobId}`);
  }

  // library
  library(kind?: string): Promise<{ assets: AssetRecordJson[] }> {
    const query = kind ? `?kind=${encodeURIComponent(kind)}` : "";
    return this.request("GET", `/library${query}`);
  }

  saveClip(clip: unknown): Promise<{ asset: AssetRecordJson }> {
    return this.request("POST", "/library/clips", clip);
  }
}

/** Parse one SSE frame block into a trace row (id + data lines). */
export function parseSseBlock(block: string): TraceRow | null {
  let data: string | null = null;
  for (const line of block.split("\n")) {
    if (line.startsWith("data: ")) data = line.slice(6);
  }
  return data ? (JSON.parse(data) as TraceRow) : null;
}
