import { describe, expect, it } from "vitest";

import { StudioApi } from "../src/api.js";
import { ZoneTool } from "../src/zoneTool.js";
import type { SceneJson, SceneZoneJson } from "../src/types.js";
import { fakeFetch } from "./helpers.js";

function baseScene(): SceneJson {
  return {
    planes: [{ id: "ground", origin: [0, 0, 0], normal: [0, 1, 0], extents: [2, 2] }],
    objects: [],
    zones: [],
    spawn: { position: [0, 0.15, 0], yaw_deg: 0 },
  };
}

function zoneServer() {
  const scene = baseScene();
  const routes = [
    {
      method: "POST",
      path: /^\/scenes\/scene-1\/zones$/,
      handler: (body: any) => {
        const label = String.fromCharCode(65 + scene.zones.length);
        const zone: SceneZoneJson = {
          label,
          plane: body.plane,
          center: [body.center[0], 0, body.center[1]],
          half_extents: body.half_extents,
          height: 0.5,
        };
        scene.zones.push(zone);
        return { body: { id: "scene-1", zone: { label }, scene } };
      },
    },
    {
      method: "PUT",
      path: /^\/scenes\/scene-1\/zones\/(\w)$/,
      handler: (body: any, match: RegExpMatchArray) => {
        const zone = scene.zones.find((z) => z.label === match[1])!;
        zone.center = [body.center[0], 0, body.center[2]];
        if (body.half_extents) zone.half_extents = body.half_extents;
        return { body: { id: "scene-1", scene } };
      },
    },
  ];
  return { scene, routes };
}

describe("zone tool", () => {
  it("creates zones labeled A then B, in creation order", async () => {
    const { routes } = zoneServer();
    const api = new StudioApi("http://test", fakeFetch(routes));
    const changes: SceneJson[] = [];
    const tool = new ZoneTool(api, "scene-1", baseScene(), (s) => changes.push(s));
    const first = await tool.create("ground", [0.2, 0.2], [0.2, 0.2]);
    const second = await tool.create("ground", [-0.4, 0.1], [0.3, 0.2]);
    expect([first, second]).toEqual(["A", "B"]);
    expect(tool.labels()).toEqual(["A", "B"]);
    expect(changes).toHaveLength(2); // the open program re-validates per change
  });

  it("selects only existing zones", async () => {
    const { routes } = zoneServer();
    const api = new StudioApi("http://test", fakeFetch(routes));
    const tool = new ZoneTool(api, "scene-1", baseScene());
    await tool.create("ground", [0, 0], [0.2, 0.2]);
    tool.select("A");
    expect(tool.selected).toBe("A");
    expect(() => tool.select("Q")).toThrow(/does not exist/);
  });

  it("places the selected zone through the API", async () => {
    const { scene, routes } = zoneServer();
    const api = new StudioApi("http://test", fakeFetch(routes));
    const tool = new ZoneTool(api, "scene-1", baseScene());
    await tool.create("ground", [0, 0], [0.2, 0.2]);
    await tool.place([1.0, 0.0, -0.5], [0.25, 0.25]);
    expect(scene.zones[0].center).toEqual([1.0, 0, -0.5]);
    expect(scene.zones[0].half_extents).toEqual([0.25, 0.25]);
    expect(tool.zones[0].center).toEqual([1.0, 0, -0.5]);
  });
});
