/**
 * Live-run state, reduced purely from the streamed trace rows.
 *
 * The studio never simulates: the tick counter is the latest streamed
 * tick, detection badges come from detection_update effects, and the
 * character/trail state replays moved/turned/trail effects. Feeding the
 * same rows always produces the same state.
 */
import type { SceneSnapshot, TraceRow } from "./types.js";

export type DetectionStatus = "searching" | "found" | "touched";

export const OBJECT_BADGE_TEXT: Record<DetectionStatus, string> = {
  searching: "Searching for object",
  found: "Object found",
  touched: "Object touched",
};

export interface BadgeState {
  target: string;
  targetKind: "object" | "zone";
  status: string;
  text: string;
}

export interface RunState {
  tick: number;
  status: "idle" | "running" | "stopped" | "finished";
  characterPosition: [number, number, number];
  characterYawMdeg: number;
  worn: string[];
  trail: [number, number, number][];
  trailActive: boolean;
  activeAnimation: string | null;
  badges: Map<string, BadgeState>;
  lastSceneHash: string;
}

function badgeKey(kind: string, target: string): string {
  return `${kind}:${target}`;
}

export function badgeText(targetKind: "object" | "zone", target: string, status: string): string {
  if (targetKind === "object") {
    return OBJECT_BADGE_TEXT[status as DetectionStatus] ?? status;
  }
  return status === "touched" ? `Zone ${target} touched` : `Zone ${target} placed`;
}

/** Initialize from the session's scene snapshot (tick 0 perception included). */
export function initialRunState(snapshot: SceneSnapshot, status: RunState["status"]): RunState {
  const badges = new Map<string, BadgeState>();
  for (const [name, detection] of Object.entries(snapshot.perception.detections)) {
    badges.set(badgeKey("object", name), {
      target: name,
      targetKind: "object",
      status: detection.status,
      text: badgeText("object", name, detection.status),
    });
  }
  for (const [label, touched] of Object.entries(snapshot.perception.zone_touches)) {
    const status = touched ? "touched" : "placed";
    badges.set(badgeKey("zone", label), {
      target: label,
      targetKind: "zone",
      status,
      text: badgeText("zone", label, status),
    });
  }
  return {
    tick: snapshot.tick,
    status,
    characterPosition: [...snapshot.character.position],
    characterYawMdeg: snapshot.character.yaw_mdeg,
    worn: [...snapshot.worn],
    trail: snapshot.trail.map((p) => [...p] as [number, number, number]),
    trailActive: snapshot.trail_active,
    activeAnimation: snapshot.active_animation,
    badges,
    lastSceneHash: "",
  };
}

/** Fold one streamed trace row into the state (mutates and returns it). */
export function applyTraceRow(state: RunState, row: TraceRow): RunState {
  state.tick = row.tick;
  state.lastSceneHash = row.scene_hash;
  for (const effect of row.effects) {
    switch (effect.kind) {
      case "moved":
        if (effect.position) state.characterPosition = [...effect.position];
        break;
      case "turned":
        if (effect.yaw_mdeg !== undefined) state.characterYawMdeg = effect.yaw_mdeg;
        break;
      case "trail_started":
        state.trailActive = true;
        break;
      case "trail_stopped":
        state.trailActive = false;
        break;
      case "trail_point":
        if (effect.position) state.trail.push([...effect.position]);
        break;
      case "wear":
        if (effect.accessory && !state.worn.includes(effect.accessory)) {
          state.worn.push(effect.accessory);
        }
        break;
      case "unwear":
        if (effect.accessory) {
          state.worn = state.worn.filter((name) => name !== effect.accessory);
        }
        break;
      case "animation_started":
        state.activeAnimation = effect.clip ?? null;
        break;
      case "detection_update":
        if (effect.target && effect.target_kind && effect.status) {
          state.badges.set(badgeKey(effect.target_kind, effect.target), {
            target: effect.target,
            targetKind: effect.target_kind,
            status: effect.status,
            text: badgeText(effect.target_kind, effect.target, effect.status),
          });
        }
        break;
      case "event":
        if (effect.event === "tap_character" && effect.applied) {
          state.status = "stopped";
        }
        if (effect.event === "touch_character" && effect.applied) {
          state.status = "running";
        }
        break;
      default:
        break;
    }
  }
  return state;
}

export function badgeList(state: RunState): BadgeState[] {
  return [...state.badges.values()].sort((a, b) =>
    `${a.targetKind}:${a.target}`.localeCompare(`${b.targetKind}:${b.target}`),
  );
}
