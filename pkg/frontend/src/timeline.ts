/**
 * Pose timeline: per-joint rotation keyframes that export a replayable
 * clip. Rotations are authored as axis-angle and serialized as unit
 * quaternions in the engine's clip schema (9 significant digits).
 */

export const TRACKING_SKELETON_ID = "tracking-28";

export const TIMELINE_JOINTS = [
  "hips", "spine.1", "spine.2", "spine.3", "chest", "neck.1", "neck.2", "head",
  "clavicle.L", "shoulder.L", "elbow.L", "wrist.L", "hand.L",
  "clavicle.R", "shoulder.R", "elbow.R", "wrist.R", "hand.R",
  "hip.L", "knee.L", "ankle.L", "foot.L", "toes.L",
  "hip.R", "knee.R", "ankle.R", "foot.R", "toes.R",
] as const;

export type JointName = (typeof TIMELINE_JOINTS)[number];

export interface Keyframe {
  /** Seconds from clip start. */
  t: number;
  axis: [number, number, number];
  angleRad: number;
}

export interface ClipJson {
  version: 1;
  name: string;
  skeleton_id: string;
  frames: { t: number; joints: Record<string, { q: number[]; p: number[] }> }[];
}

function quantize(value: number): number {
  const rounded = Number(value.toPrecision(9));
  return rounded === 0 ? 0 : rounded;
}

export function axisAngleToQuat(
  axis: [number, number, number],
  angleRad: number,
): [number, number, number, number] {
  const norm = Math.hypot(axis[0], axis[1], axis[2]);
  if (norm === 0) throw new Error("rotation axis cannot be zero");
  const half = angleRad / 2;
  const s = Math.sin(half) / norm;
  return [axis[0] * s, axis[1] * s, axis[2] * s, Math.cos(half)];
}

function slerpFromIdentityAxisAngle(frame: Keyframe, u: number): [number, number, number, number] {
  // interpolating an axis-angle rotation from identity scales the angle
  return axisAngleToQuat(frame.axis, frame.angleRad * u);
}

export class PoseTimeline {
  name: string;
  sampleHz: number;
  tracks = new Map<JointName, Keyframe[]>();

  constructor(name: string, sampleHz = 20) {
    this.name = name;
    this.sampleHz = sampleHz;
  }

  addKeyframe(joint: JointName, frame: Keyframe): void {
    const track = this.tracks.get(joint) ?? [];
    track.push(frame);
    track.sort((a, b) => a.t - b.t);
    if (new Set(track.map((k) => k.t)).size !== track.length) {
      throw new Error(`duplicate keyframe time on ${joint}`);
    }
    this.tracks.set(joint, track);
  }

  removeKeyframe(joint: JointName, t: number): void {
    const track = this.tracks.get(joint);
    if (!track) return;
    this.tracks.set(
      joint,
      track.filter((k) => k.t !== t),
    );
  }

  duration(): number {
    let end = 0;
    for (const track of this.tracks.values()) {
      for (const frame of track) end = Math.max(end, frame.t);
    }
    return end;
  }

  /** Rotation of a joint at time t (piecewise angle interpolation). */
  rotationAt(joint: JointName, t: number): [number, number, number, number] {
    const track = this.tracks.get(joint);
    if (!track || track.length === 0) return [0, 0, 0, 1];
    const first = track[0];
    if (t <= first.t) {
      if (first.t === 0) return axisAngleToQuat(first.axis, first.angleRad);
      return slerpFromIdentityAxisAngle(first, Math.max(t, 0) / first.t);
    }
    for (let i = 0; i < track.length - 1; i += 1) {
      const a = track[i];
      const b = track[i + 1];
      if (t <= b.t) {
        const u = (t - a.t) / (b.t - a.t);
        // tracks keep one axis per joint in practice; blend angles when so,
        // otherwise jump at the midpoint
        if (sameAxis(a.axis, b.axis)) {
          return axisAngleToQuat(a.axis, a.angleRad + (b.angleRad - a.angleRad) * u);
        }
        return u < 0.5
          ? axisAngleToQuat(a.axis, a.angleRad)
          : axisAngleToQuat(b.axis, b.angleRad);
      }
    }
    const last = track[track.length - 1];
    return axisAngleToQuat(last.axis, last.angleRad);
  }

  /** Export in the engine's clip schema, sampled at the timeline rate. */
  toClipJson(): ClipJson {
    const duration = this.duration();
    const step = 1 / this.sampleHz;
    const count = Math.max(1, Math.floor(duration / step + 1e-9) + 1);
    const frames = [];
    for (let index = 0; index < count; index += 1) {
      const t = index * step;
      const joints: Record<string, { q: number[]; p: number[] }> = {};
      for (const joint of this.tracks.keys()) {
        const q = this.rotationAt(joint, t).map(quantize);
        joints[joint] = { q, p: [0, 0, 0] };
      }
      frames.push({ t: quantize(t), joints });
    }
    return {
      version: 1,
      name: this.name,
      skeleton_id: TRACKING_SKELETON_ID,
      frames,
    };
  }
}

function sameAxis(a: [number, number, number], b: [number, number, number]): boolean {
  return a[0] === b[0] && a[1] === b[1] && a[2] === b[2];
}
