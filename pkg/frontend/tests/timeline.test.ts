import { describe, expect, it } from "vitest";

import { axisAngleToQuat, PoseTimeline } from "../src/timeline.js";

describe("pose timeline", () => {
  it("exports the engine clip schema", () => {
    const timeline = new PoseTimeline("nod", 20);
    timeline.addKeyframe("head", { t: 0, axis: [1, 0, 0], angleRad: 0 });
    timeline.addKeyframe("head", { t: 1.0, axis: [1, 0, 0], angleRad: Math.PI / 6 });
    const clip = timeline.toClipJson();
    expect(clip.version).toBe(1);
    expect(clip.skeleton_id).toBe("tracking-28");
    expect(clip.name).toBe("nod");
    expect(clip.frames).toHaveLength(21); // 0..1.0 at 20 Hz inclusive
    expect(clip.frames[0].t).toBe(0);
    expect(clip.frames[20].t).toBe(1);
    const frame = clip.frames[20].joints["head"];
    expect(frame.q).toHaveLength(4);
    expect(frame.p).toEqual([0, 0, 0]);
  });

  it("keyframes interpolate angles along a shared axis", () => {
    const timeline = new PoseTimeline("wave", 20);
    timeline.addKeyframe("shoulder.L", { t: 0, axis: [0, 0, 1], angleRad: 0 });
    timeline.addKeyframe("shoulder.L", { t: 2.0, axis: [0, 0, 1], angleRad: Math.PI / 2 });
    const mid = timeline.rotationAt("shoulder.L", 1.0);
    const expected = axisAngleToQuat([0, 0, 1], Math.PI / 4);
    for (let i = 0; i < 4; i += 1) {
      expect(mid[i]).toBeCloseTo(expected[i], 9);
    }
  });

  it("quaternions are unit and quantized for the wire", () => {
    const timeline = new PoseTimeline("spin", 10);
    timeline.addKeyframe("hips", { t: 0.5, axis: [0, 1, 0], angleRad: 1.234567891234 });
    const clip = timeline.toClipJson();
    for (const frame of clip.frames) {
      const q = frame.joints["hips"].q;
      const norm = Math.hypot(q[0], q[1], q[2], q[3]);
      expect(Math.abs(norm - 1)).toBeLessThan(1e-6);
      for (const value of q) {
        expect(value).toBe(Number(value.toPrecision(9)));
        if (value === 0) expect(Object.is(value, -0)).toBe(false);
      }
    }
  });

  it("rejects duplicate keyframe times and removes cleanly", () => {
    const timeline = new PoseTimeline("x", 20);
    timeline.addKeyframe("head", { t: 0.5, axis: [1, 0, 0], angleRad: 1 });
    expect(() =>
      timeline.addKeyframe("head", { t: 0.5, axis: [1, 0, 0], angleRad: 2 }),
    ).toThrow(/duplicate/);
    timeline.removeKeyframe("head", 0.5);
    expect(timeline.duration()).toBe(0);
  });
});
